//! Command-line surface.
//!
//! Exit codes: 0 on success, 2 for usage and config errors, 3 for numeric
//! domain errors. Diagnostics go to the error stream.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::campaign::{self, CampaignConfig, ParticleHypothesis};
use crate::config::{load_config, ConfigError, ExperimentConfig};
use crate::error::Error;
use crate::kernels::{self, AxionParams, CavitySpec, ParaphotonParams};
use crate::limits::{self, BandConvention, ExclusionCurve};
use crate::output::{self, fmt_f64, Format, Metadata};
use crate::statistics::{self, PulseBasis};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "photoregen", version, about = "Photon regeneration and ellipticity limits for axion-like particles and paraphotons")]
pub struct Cli {
    /// Experiment description (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output format for written files and band summaries.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Particle {
    Axion,
    Paraphoton,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LimitKind {
    Axion,
    Paraphoton,
    Ellipticity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TallyArg {
    /// Field-on pulses only.
    Field,
    /// All pulses.
    Total,
}

impl From<TallyArg> for PulseBasis {
    fn from(t: TallyArg) -> Self {
        match t {
            TallyArg::Field => PulseBasis::FieldOn,
            TallyArg::Total => PulseBasis::All,
        }
    }
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Upper regeneration probability; derived from the config statistics if absent.
    #[arg(long)]
    pub probability: Option<f64>,
    /// Confidence level overriding the config value.
    #[arg(long)]
    pub confidence: Option<f64>,
    /// Pulses entering N_eff [default: field for axion, total for paraphoton].
    #[arg(long, value_enum)]
    pub tally: Option<TallyArg>,
    /// Ellipticity limit in rad, overriding the config value.
    #[arg(long)]
    pub psi_limit: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regeneration probability for one hypothesis.
    Prob {
        #[arg(value_enum)]
        particle: Particle,
        /// Mass in eV.
        #[arg(long, allow_hyphen_values = true)]
        mass: f64,
        /// M in eV (axion) or chi (paraphoton).
        #[arg(long, allow_hyphen_values = true)]
        coupling: f64,
    },
    /// Axion-induced ellipticity in rad.
    Ellipticity {
        #[arg(long, allow_hyphen_values = true)]
        mass: f64,
        /// M in eV.
        #[arg(long, allow_hyphen_values = true)]
        coupling: f64,
        /// Single pass, ignoring the config cavity.
        #[arg(long)]
        no_cavity: bool,
    },
    /// Missed-photon bound and upper probabilities.
    Nmissed {
        #[arg(long)]
        confidence: Option<f64>,
    },
    /// Exclusion curve over the config mass grid.
    Limit {
        #[arg(value_enum)]
        kind: LimitKind,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        bound: BoundArgs,
    },
    /// One-number summary of a curve over a mass band.
    Band {
        #[arg(value_enum)]
        kind: LimitKind,
        /// Band lower edge in eV.
        #[arg(long)]
        min: f64,
        /// Band upper edge in eV.
        #[arg(long)]
        max: f64,
        /// envelope_best, worst_constrained or quantile(q)
        #[arg(long, default_value = "envelope_best")]
        convention: String,
        #[command(flatten)]
        bound: BoundArgs,
    },
    /// Monte Carlo campaign record.
    Simulate {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, requires_all = ["mass", "coupling"])]
        hypothesis: Option<Particle>,
        #[arg(long, allow_hyphen_values = true)]
        mass: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        coupling: Option<f64>,
    },
    /// Convert between cavity finesse and photon lifetime.
    Cavity {
        #[arg(long, conflicts_with = "lifetime", required_unless_present = "lifetime")]
        finesse: Option<f64>,
        /// Lifetime in seconds.
        #[arg(long)]
        lifetime: Option<f64>,
        /// Cavity length in m; defaults to the config cavity.
        #[arg(long)]
        length: Option<f64>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numeric(#[from] Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(Error::Domain { .. } | Error::EmptyBand { .. }) => EXIT_DOMAIN,
            CliError::Numeric(Error::Config { .. }) => EXIT_USAGE,
            CliError::Usage(_) | CliError::Config(_) => EXIT_USAGE,
            // Output destinations are part of the invocation.
            CliError::Io { .. } => EXIT_USAGE,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn finite_positive(flag: &str, v: f64) -> CliResult<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("--{flag} must be a finite positive number, got {v}")))
    }
}

fn finite(flag: &str, v: f64) -> CliResult<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("--{flag} must be finite, got {v}")))
    }
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn hypothesis(particle: Particle, mass: f64, coupling: f64) -> CliResult<ParticleHypothesis> {
    let mass = finite("mass", mass)?;
    let coupling = finite_positive("coupling", coupling)?;
    Ok(match particle {
        Particle::Axion => ParticleHypothesis::Axion(AxionParams::new(mass, coupling)?),
        Particle::Paraphoton => ParticleHypothesis::Paraphoton(ParaphotonParams::new(mass, coupling)?),
    })
}

/// Resolved inversion input plus the metadata explaining where it came from.
struct BoundInput {
    value: f64,
    meta: Metadata,
}

fn probability_bound(cfg: &ExperimentConfig, kind: LimitKind, args: &BoundArgs) -> CliResult<BoundInput> {
    if let Some(p) = args.probability {
        let p = finite_positive("probability", p)?;
        return Ok(BoundInput {
            value: p,
            meta: vec![("probability_source".into(), "command line".into())],
        });
    }
    let basis: PulseBasis = args
        .tally
        .map(Into::into)
        .unwrap_or(if kind == LimitKind::Paraphoton {
            PulseBasis::All
        } else {
            PulseBasis::FieldOn
        });
    let cl = match args.confidence {
        Some(c) => c,
        None => cfg.confidence_level()?,
    };
    let detector = cfg.detector()?;
    let tally = cfg.tally()?;
    let n = statistics::n_missed(cl, detector.eta_det())?;
    let n_eff = tally.effective_photons_for(basis);
    let p = statistics::upper_probability(n, n_eff)?;
    Ok(BoundInput {
        value: p,
        meta: vec![
            ("probability_source".into(), "n_missed / n_eff".into()),
            ("confidence_level".into(), fmt_f64(cl)),
            ("n_missed".into(), fmt_f64(n)),
            ("n_eff".into(), fmt_f64(n_eff)),
            ("tally".into(), basis.as_str().into()),
        ],
    })
}

fn build_curve(cfg: &ExperimentConfig, kind: LimitKind, args: &BoundArgs) -> CliResult<(ExclusionCurve, Metadata)> {
    let (curve, meta) = match kind {
        LimitKind::Axion => {
            let b = probability_bound(cfg, kind, args)?;
            let c = limits::axion_limit_curve(b.value, &cfg.generation, &cfg.regeneration, cfg.omega, &cfg.grid)?;
            (c, b.meta)
        }
        LimitKind::Paraphoton => {
            let b = probability_bound(cfg, kind, args)?;
            let c = limits::paraphoton_limit_curve(b.value, &cfg.optical_path()?, cfg.omega, &cfg.grid)?;
            (c, b.meta)
        }
        LimitKind::Ellipticity => {
            let psi = match args.psi_limit {
                Some(p) => finite_positive("psi-limit", p)?,
                None => cfg.psi_limit()?,
            };
            let c = limits::ellipticity_limit_curve(psi, &cfg.generation, &cfg.cavity()?, cfg.omega, &cfg.grid)?;
            (c, Vec::new())
        }
    };
    let mut meta = meta;
    meta.push(("omega_ev".into(), fmt_f64(cfg.omega)));
    meta.extend(cfg.notes.iter().map(|n| ("config_note".to_string(), n.clone())));
    Ok((curve.with_experiment(cfg.id.clone()), meta))
}

fn require_config(cli: &Cli) -> CliResult<ExperimentConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("--config <path> is required".into()))?;
    Ok(load_config(path)?)
}

fn execute(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    let format: Format = cli.format.into();
    let cfg = require_config(cli)?;
    let mut say = |s: String| -> CliResult<()> {
        out.write_all(s.as_bytes()).map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        })
    };

    match &cli.command {
        Command::Prob { particle, mass, coupling } => match hypothesis(*particle, *mass, *coupling)? {
            ParticleHypothesis::Axion(a) => {
                let p_gen = kernels::axion_conversion_probability(&cfg.generation, &a, cfg.omega)?;
                let p_regen = kernels::axion_conversion_probability(&cfg.regeneration, &a, cfg.omega)?;
                say(format!(
                    "p_gen = {}\np_regen = {}\nprobability = {}\n",
                    fmt_f64(p_gen),
                    fmt_f64(p_regen),
                    fmt_f64(p_gen * p_regen)
                ))
            }
            ParticleHypothesis::Paraphoton(p) => {
                let prob = kernels::paraphoton_regeneration_probability(&cfg.optical_path()?, &p, cfg.omega)?;
                say(format!("probability = {}\n", fmt_f64(prob)))
            }
        },

        Command::Ellipticity { mass, coupling, no_cavity } => {
            let a = match hypothesis(Particle::Axion, *mass, *coupling)? {
                ParticleHypothesis::Axion(a) => a,
                ParticleHypothesis::Paraphoton(_) => unreachable!(),
            };
            let cavity = if *no_cavity { None } else { cfg.cavity };
            let psi = kernels::axion_ellipticity(&cfg.generation, &a, cfg.omega, cavity.as_ref())?;
            let passes = cavity.map_or(1.0, |c| c.enhancement());
            say(format!("psi_rad = {}\npass_factor = {}\n", fmt_f64(psi), fmt_f64(passes)))
        }

        Command::Nmissed { confidence } => {
            let cl = match confidence {
                Some(c) => *c,
                None => cfg.confidence_level()?,
            };
            let det = cfg.detector()?;
            let n = statistics::n_missed(cl, det.eta_det())?;
            let mut text = format!(
                "confidence_level = {}\neta_det = {}\nn_missed = {}\nn_missed_bound = {}\n",
                fmt_f64(cl),
                fmt_f64(det.eta_det()),
                fmt_f64(n),
                statistics::n_missed_bound(n)
            );
            if let Some(tally) = cfg.tally {
                for basis in [PulseBasis::FieldOn, PulseBasis::All] {
                    let n_eff = tally.effective_photons_for(basis);
                    let tag = basis.as_str();
                    text.push_str(&format!("n_eff_{tag} = {}\n", fmt_f64(n_eff)));
                    if n_eff > 0.0 {
                        let p = statistics::upper_probability(n, n_eff)?;
                        text.push_str(&format!("p_upper_{tag} = {}\n", fmt_f64(p)));
                    }
                }
            }
            say(text)
        }

        Command::Limit { kind, out: path, bound } => {
            let (curve, meta) = build_curve(&cfg, *kind, bound)?;
            let text = match format {
                Format::Csv => output::curve_to_csv(&curve, &meta),
                Format::Json => output::curve_to_json(&curve, &meta),
            };
            write_file(path, &text)?;
            let constrained = curve.points.iter().filter(|p| p.constrained()).count();
            let mut summary = format!(
                "wrote {} points ({} constrained) to {}\n",
                curve.points.len(),
                constrained,
                path.display()
            );
            if let Some((m, b)) = curve.constrained_points().next() {
                summary.push_str(&format!("lowest_mass_bound = {} at mass_ev = {}\n", fmt_f64(b), fmt_f64(m)));
            }
            say(summary)
        }

        Command::Band { kind, min, max, convention, bound } => {
            let convention: BandConvention = convention.parse()?;
            let (curve, _) = build_curve(&cfg, *kind, bound)?;
            let band = limits::band_summary(&curve, *min, *max, convention)?;
            say(output::band_to_text(&cfg.id, &band, format))
        }

        Command::Simulate { seed, out: path, hypothesis: particle, mass, coupling } => {
            let hyp = match (particle, mass, coupling) {
                (Some(p), Some(m), Some(c)) => Some(hypothesis(*p, *m, *c)?),
                (None, None, None) => None,
                _ => return Err(CliError::Usage("--hypothesis needs --mass and --coupling".into())),
            };
            let config = CampaignConfig {
                detector: cfg.detector()?,
                tally: cfg.tally()?,
                hypothesis: hyp,
                geometry: cfg.geometry()?,
                seed: *seed,
            };
            let record = campaign::simulate_campaign(&config)?;
            let meta: Metadata = vec![
                ("experiment".into(), cfg.id.clone()),
                ("hypothesis".into(), hyp.map_or_else(|| "none".to_string(), |h| h.label())),
            ];
            let text = match format {
                Format::Csv => output::record_to_csv(&record, &meta),
                Format::Json => output::record_to_json(&record, &meta),
            };
            write_file(path, &text)?;
            say(format!(
                "wrote {} pulses to {}\nsignal_counts = {}\ndark_counts = {}\nexpected_dark_counts = {}\n",
                record.entries.len(),
                path.display(),
                record.totals.signal_counts,
                record.totals.dark_counts,
                fmt_f64(record.totals.expected_dark)
            ))
        }

        Command::Cavity { finesse, lifetime, length } => {
            let length = match length {
                Some(l) => finite_positive("length", *l)?,
                None => cfg.cavity()?.length_m(),
            };
            match (finesse, lifetime) {
                (Some(f), None) => {
                    let c = CavitySpec::new(length, finite_positive("finesse", *f)?)?;
                    say(format!("lifetime_s = {}\n", fmt_f64(kernels::lifetime_from_finesse(&c))))
                }
                (None, Some(t)) => {
                    let f = kernels::finesse_from_lifetime(finite_positive("lifetime", *t)?, length)?;
                    say(format!("finesse = {}\n", fmt_f64(f)))
                }
                _ => Err(CliError::Usage("give exactly one of --finesse and --lifetime".into())),
            }
        }
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                EXIT_USAGE
            } else {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    match execute(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "photoregen: {e}");
            e.exit_code()
        }
    }
}
