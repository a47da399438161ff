//! Flat key=value experiment configuration.
//!
//! One file per experiment. Lines are `key = value`, `#` starts a comment
//! line, arrays use `[a, b, c]`. Unknown and duplicate keys are rejected so
//! a typo cannot silently fall back to a default. Every run writes back a
//! complete resolved echo; re-running from the echo reproduces the run.

use std::fmt::Write as _;
use std::path::PathBuf;

use phaselab::fourier::CirculantSpectrum;
use phaselab::model::PlantSpec;
use phaselab::oracles::Regime;
use phaselab::sgd::SgdVariant;
use phaselab::special::Activation;
use phaselab::{Error, Result};

/// Companion extensive modes and their √-eigenvalue exponents, in spike
/// order. `powerlaw(exponent, top_modes)` places mode k0 at N^exponent and
/// the first `top_modes - 1` companions at N^{2·half-exponent / 2}.
pub const COMPANION_MODES: [usize; 5] = [15, 24, 20, 9, 18];
pub const COMPANION_EXPONENTS: [f64; 5] = [0.6, 0.55, 0.65, 0.7, 0.45];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    IsotropicSweep,
    PowerlawSweep,
    Landscape,
    OdeCompare,
    Surgery,
    TextureTrain,
    ValidateStats,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::IsotropicSweep => "isotropic_sweep",
            Self::PowerlawSweep => "powerlaw_sweep",
            Self::Landscape => "landscape",
            Self::OdeCompare => "ode_compare",
            Self::Surgery => "surgery",
            Self::TextureTrain => "texture_train",
            Self::ValidateStats => "validate_stats",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "isotropic_sweep" => Self::IsotropicSweep,
            "powerlaw_sweep" => Self::PowerlawSweep,
            "landscape" => Self::Landscape,
            "ode_compare" => Self::OdeCompare,
            "surgery" => Self::Surgery,
            "texture_train" => Self::TextureTrain,
            "validate_stats" => Self::ValidateStats,
            other => {
                return Err(parse_err("experiment", format!("unknown experiment {other:?}")))
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpectrumSpec {
    Isotropic,
    /// Mode k0 at N^exponent plus `top_modes - 1` canonical companions.
    PowerLaw { exponent: f64, top_modes: usize },
    /// Full length-N eigenvalue list.
    Explicit(Vec<f64>),
}

impl SpectrumSpec {
    pub fn canonical(&self) -> String {
        match self {
            Self::Isotropic => "isotropic".into(),
            Self::PowerLaw { exponent, top_modes } => format!("powerlaw({exponent}, {top_modes})"),
            Self::Explicit(eigs) => {
                let body: Vec<String> = eigs.iter().map(|e| format!("{e}")).collect();
                format!("[{}]", body.join(", "))
            }
        }
    }

    fn parse(s: &str) -> Result<Self> {
        if s == "isotropic" {
            return Ok(Self::Isotropic);
        }
        if let Some(body) = s.strip_prefix("powerlaw(").and_then(|r| r.strip_suffix(')')) {
            let parts: Vec<&str> = body.split(',').map(str::trim).collect();
            if parts.len() != 2 {
                return Err(parse_err("spectrum", "powerlaw takes (exponent, top_modes)".into()));
            }
            let exponent = parse_f64("spectrum", parts[0])?;
            let top_modes = parse_usize("spectrum", parts[1])?;
            return Ok(Self::PowerLaw { exponent, top_modes });
        }
        if s.starts_with('[') {
            return Ok(Self::Explicit(parse_f64_array("spectrum", s)?));
        }
        Err(parse_err(
            "spectrum",
            format!("expected isotropic, powerlaw(exponent, top_modes), or [..], got {s:?}"),
        ))
    }

    /// Materialize the covariance spectrum at dimension `n` together with
    /// the flagged principal (companion) modes.
    pub fn build(&self, n: usize, k0: usize, principal_override: &[usize]) -> Result<(CirculantSpectrum, Vec<usize>)> {
        match self {
            Self::Isotropic => Ok((CirculantSpectrum::isotropic(n), principal_override.to_vec())),
            Self::PowerLaw { exponent, top_modes } => {
                if !(1..=1 + COMPANION_MODES.len()).contains(top_modes) {
                    return Err(Error::InvalidArgument(format!(
                        "powerlaw top_modes must lie in 1..={}, got {top_modes}",
                        1 + COMPANION_MODES.len()
                    )));
                }
                let nf = n as f64;
                let mut modes = vec![(k0, nf.powf(*exponent))];
                let mut principal = Vec::new();
                for i in 0..top_modes - 1 {
                    let m = COMPANION_MODES[i];
                    if m == k0 {
                        return Err(Error::InvalidArgument(format!(
                            "companion mode {m} collides with k0"
                        )));
                    }
                    modes.push((m, nf.powf(COMPANION_EXPONENTS[i])));
                    principal.push(m);
                }
                Ok((CirculantSpectrum::with_modes(n, &modes)?, principal))
            }
            Self::Explicit(eigs) => {
                if eigs.len() != n {
                    return Err(Error::InvalidArgument(format!(
                        "explicit spectrum has {} eigenvalues, config says n = {n}",
                        eigs.len()
                    )));
                }
                Ok((CirculantSpectrum::from_eigenvalues(eigs.clone())?, principal_override.to_vec()))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActivationKind {
    H4,
    LogCosh,
}

impl ActivationKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::H4 => "h4",
            Self::LogCosh => "logcosh",
        }
    }

    pub fn activation(self) -> Activation {
        match self {
            Self::H4 => Activation::Hermite4,
            Self::LogCosh => Activation::LogCosh,
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "h4" => Ok(Self::H4),
            "logcosh" => Ok(Self::LogCosh),
            other => Err(parse_err("activation", format!("expected h4 or logcosh, got {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegimeKind {
    Extensive,
    NearIsotropic,
}

impl RegimeKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Extensive => "extensive",
            Self::NearIsotropic => "near_isotropic",
        }
    }

    pub fn regime(self) -> Regime {
        match self {
            Self::Extensive => Regime::Extensive,
            Self::NearIsotropic => Regime::NearIsotropic,
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "extensive" => Ok(Self::Extensive),
            "near_isotropic" => Ok(Self::NearIsotropic),
            other => {
                Err(parse_err("regime", format!("expected extensive or near_isotropic, got {other:?}")))
            }
        }
    }
}

/// Fully resolved run description. Every field has a kind-specific default,
/// so an empty config file is a valid run.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n: usize,
    pub epsilon: f64,
    pub k0: usize,
    pub spectrum: SpectrumSpec,
    /// Flagged top modes for explicit spectra; powerlaw spectra derive them.
    pub principal_modes: Vec<usize>,
    pub activation: ActivationKind,
    pub variant: SgdVariant,
    pub delta_scale: f64,
    pub beta: f64,
    pub steps: usize,
    pub seeds: usize,
    pub seed_base: u64,
    pub eta: f64,
    pub n_mc: usize,
    pub grid: usize,
    pub use_corrector: bool,
    /// Self-test hook: the validation battery appends one impossible check.
    pub inject_failure: bool,
    pub regime: RegimeKind,
    pub ode_dt: f64,
    pub corpus: Option<PathBuf>,
    pub synthesize: bool,
    pub per_class: usize,
    pub patch: usize,
    pub hidden: usize,
    pub lr: f64,
    pub epochs: usize,
    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn default_for(kind: ExperimentKind) -> Self {
        use ExperimentKind::*;
        let n: usize = 64;
        let mut cfg = ExperimentConfig {
            kind,
            n,
            epsilon: 1.2,
            k0: 6,
            spectrum: match kind {
                IsotropicSweep | Landscape | ValidateStats => SpectrumSpec::Isotropic,
                PowerlawSweep | OdeCompare => SpectrumSpec::PowerLaw { exponent: 0.5, top_modes: 6 },
                Surgery | TextureTrain => SpectrumSpec::PowerLaw { exponent: 0.5, top_modes: 1 },
            },
            principal_modes: Vec::new(),
            activation: match kind {
                IsotropicSweep | Landscape => ActivationKind::H4,
                _ => ActivationKind::LogCosh,
            },
            variant: SgdVariant::Spherical,
            delta_scale: match kind {
                PowerlawSweep | OdeCompare => 0.03,
                _ => 1e-3,
            },
            beta: 0.0,
            steps: 0,
            seeds: match kind {
                IsotropicSweep => 40,
                PowerlawSweep | OdeCompare | Surgery | TextureTrain => 8,
                _ => 1,
            },
            seed_base: 0,
            eta: 0.25,
            n_mc: match kind {
                Landscape => 20_000,
                _ => 200_000,
            },
            grid: 41,
            use_corrector: true,
            inject_failure: false,
            regime: RegimeKind::Extensive,
            ode_dt: 0.01,
            corpus: None,
            synthesize: false,
            per_class: 400,
            patch: 8,
            hidden: 30,
            lr: 1e-3,
            epochs: 40,
            out: PathBuf::from(format!("runs/{}", kind.name())),
        };
        cfg.steps = match kind {
            IsotropicSweep => 8 * n * n * n,
            PowerlawSweep => n * n * n,
            OdeCompare => 200 * n,
            _ => 0,
        };
        cfg
    }

    /// Parse `text` over the kind's defaults. The `experiment` key, when
    /// present, must agree with the subcommand.
    pub fn parse(kind: ExperimentKind, text: &str) -> Result<Self> {
        let mut cfg = Self::default_for(kind);
        let mut seen: Vec<String> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                parse_err("config", format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            if seen.iter().any(|k| k == key) {
                return Err(parse_err("config", format!("duplicate key {key:?}")));
            }
            seen.push(key.to_string());
            cfg.apply(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "experiment" => {
                let k = ExperimentKind::parse(value)?;
                if k != self.kind {
                    return Err(parse_err(
                        "experiment",
                        format!("config says {} but the subcommand is {}", k.name(), self.kind.name()),
                    ));
                }
            }
            "n" => self.n = parse_usize(key, value)?,
            "epsilon" => self.epsilon = parse_f64(key, value)?,
            "k0" => self.k0 = parse_usize(key, value)?,
            "spectrum" => self.spectrum = SpectrumSpec::parse(value)?,
            "principal_modes" => self.principal_modes = parse_usize_array(key, value)?,
            "activation" => self.activation = ActivationKind::parse(value)?,
            "variant" => {
                self.variant = match value {
                    "spherical" => SgdVariant::Spherical,
                    "penalized" => SgdVariant::Penalized,
                    other => {
                        return Err(parse_err(key, format!("expected spherical or penalized, got {other:?}")))
                    }
                }
            }
            "delta_scale" => self.delta_scale = parse_f64(key, value)?,
            "beta" => self.beta = parse_f64(key, value)?,
            "steps" => self.steps = parse_usize(key, value)?,
            "seeds" => self.seeds = parse_usize(key, value)?,
            "seed_base" => self.seed_base = parse_u64(key, value)?,
            "eta" => self.eta = parse_f64(key, value)?,
            "n_mc" => self.n_mc = parse_usize(key, value)?,
            "grid" => self.grid = parse_usize(key, value)?,
            "use_corrector" => self.use_corrector = parse_bool(key, value)?,
            "inject_failure" => self.inject_failure = parse_bool(key, value)?,
            "regime" => self.regime = RegimeKind::parse(value)?,
            "ode_dt" => self.ode_dt = parse_f64(key, value)?,
            "corpus" => self.corpus = Some(PathBuf::from(value)),
            "synthesize" => self.synthesize = parse_bool(key, value)?,
            "per_class" => self.per_class = parse_usize(key, value)?,
            "patch" => self.patch = parse_usize(key, value)?,
            "hidden" => self.hidden = parse_usize(key, value)?,
            "lr" => self.lr = parse_f64(key, value)?,
            "epochs" => self.epochs = parse_usize(key, value)?,
            "out" => self.out = PathBuf::from(value),
            other => return Err(parse_err("config", format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n < 8 {
            return bad(format!("n must be at least 8, got {}", self.n));
        }
        if self.k0 == 0 || 2 * self.k0 >= self.n {
            return bad(format!("k0 = {} is not a paired mode of n = {}", self.k0, self.n));
        }
        if self.epsilon < 0.0 {
            return bad("epsilon must be nonnegative".into());
        }
        if self.seeds == 0 {
            return bad("seeds must be at least 1".into());
        }
        if self.delta_scale <= 0.0 {
            return bad("delta_scale must be positive".into());
        }
        if self.beta < 0.0 {
            return bad("beta must be nonnegative".into());
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return bad("eta must lie in (0, 1)".into());
        }
        if self.grid < 2 {
            return bad("grid must be at least 2".into());
        }
        if self.ode_dt <= 0.0 {
            return bad("ode_dt must be positive".into());
        }
        for &m in &self.principal_modes {
            if m == 0 || 2 * m >= self.n {
                return bad(format!("principal mode {m} is not a paired mode of n = {}", self.n));
            }
            if m == self.k0 {
                return bad("principal_modes must not include k0".into());
            }
        }
        if let SpectrumSpec::PowerLaw { exponent, top_modes } = self.spectrum {
            if exponent <= 0.0 {
                return bad("powerlaw exponent must be positive".into());
            }
            for &m in COMPANION_MODES.iter().take(top_modes.saturating_sub(1)) {
                if 2 * m >= self.n {
                    return bad(format!("companion mode {m} is not a paired mode of n = {}", self.n));
                }
            }
        }
        let texture = matches!(self.kind, ExperimentKind::Surgery | ExperimentKind::TextureTrain);
        if texture && self.corpus.is_none() && self.synthesize {
            if self.patch < 4 {
                return bad("patch side must be at least 4".into());
            }
            if self.n % self.patch != 0 || self.n / self.patch < 4 {
                return bad(format!(
                    "n = {} does not reshape to patches of height {}",
                    self.n, self.patch
                ));
            }
            if self.per_class < 2 {
                return bad("per_class must be at least 2".into());
            }
        }
        if texture {
            if self.hidden == 0 {
                return bad("hidden must be at least 1".into());
            }
            if self.lr < 0.0 {
                return bad("lr must be nonnegative".into());
            }
            if self.epochs == 0 {
                return bad("epochs must be at least 1".into());
            }
        }
        Ok(())
    }

    pub fn plant(&self) -> PlantSpec {
        let mut plant = PlantSpec::new(self.epsilon, self.k0);
        plant.use_corrector = self.use_corrector;
        plant
    }

    /// Resolved semantic configuration, one key per line, fixed order.
    /// Excludes `out` (and the --jobs flag): both steer where and how the
    /// run executes, not what it computes, so the echo and its content hash
    /// are portable across machines and output directories.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment = {}", self.kind.name());
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "epsilon = {}", self.epsilon);
        let _ = writeln!(s, "k0 = {}", self.k0);
        let _ = writeln!(s, "spectrum = {}", self.spectrum.canonical());
        if !self.principal_modes.is_empty() {
            let body: Vec<String> = self.principal_modes.iter().map(ToString::to_string).collect();
            let _ = writeln!(s, "principal_modes = [{}]", body.join(", "));
        }
        let _ = writeln!(s, "activation = {}", self.activation.name());
        let _ = writeln!(
            s,
            "variant = {}",
            match self.variant {
                SgdVariant::Spherical => "spherical",
                SgdVariant::Penalized => "penalized",
            }
        );
        let _ = writeln!(s, "delta_scale = {}", self.delta_scale);
        let _ = writeln!(s, "beta = {}", self.beta);
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "seeds = {}", self.seeds);
        let _ = writeln!(s, "seed_base = {}", self.seed_base);
        let _ = writeln!(s, "eta = {}", self.eta);
        let _ = writeln!(s, "n_mc = {}", self.n_mc);
        let _ = writeln!(s, "grid = {}", self.grid);
        let _ = writeln!(s, "use_corrector = {}", self.use_corrector);
        let _ = writeln!(s, "inject_failure = {}", self.inject_failure);
        let _ = writeln!(s, "regime = {}", self.regime.name());
        let _ = writeln!(s, "ode_dt = {}", self.ode_dt);
        if let Some(c) = &self.corpus {
            let _ = writeln!(s, "corpus = {}", c.display());
        }
        let _ = writeln!(s, "synthesize = {}", self.synthesize);
        let _ = writeln!(s, "per_class = {}", self.per_class);
        let _ = writeln!(s, "patch = {}", self.patch);
        let _ = writeln!(s, "hidden = {}", self.hidden);
        let _ = writeln!(s, "lr = {}", self.lr);
        let _ = writeln!(s, "epochs = {}", self.epochs);
        s
    }
}

fn parse_err(what: &str, detail: String) -> Error {
    Error::Parse { what: what.to_string(), detail }
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse().map_err(|_| parse_err(key, format!("expected an unsigned integer, got {v:?}")))
}

fn parse_u64(key: &str, v: &str) -> Result<u64> {
    v.parse().map_err(|_| parse_err(key, format!("expected an unsigned integer, got {v:?}")))
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse().map_err(|_| parse_err(key, format!("expected a number, got {v:?}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(parse_err(key, format!("expected true or false, got {other:?}"))),
    }
}

fn array_body<'a>(key: &str, v: &'a str) -> Result<&'a str> {
    v.strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| parse_err(key, format!("expected [a, b, ..], got {v:?}")))
}

fn parse_f64_array(key: &str, v: &str) -> Result<Vec<f64>> {
    let body = array_body(key, v)?;
    if body.trim().is_empty() {
        return Ok(Vec::new());
    }
    body.split(',').map(|p| parse_f64(key, p.trim())).collect()
}

fn parse_usize_array(key: &str, v: &str) -> Result<Vec<usize>> {
    let body = array_body(key, v)?;
    if body.trim().is_empty() {
        return Ok(Vec::new());
    }
    body.split(',').map(|p| parse_usize(key, p.trim())).collect()
}
