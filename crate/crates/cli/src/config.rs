//! Experiment configuration files.

use std::path::PathBuf;

use ginibrenet_core::{Disk, Estimator, FadingKind, FadingSpec, LdpRegime, NetworkModel, PlanarPoint, ProcessKind};
use serde::Deserialize;

/// Text shown by `estimate --help`.
pub const CONFIG_HELP: &str = "\
CONFIGURATION FILE
  One `key = value` per line under `[section]` headers (TOML syntax).
  Only the [fading] section is mandatory.

  [process]
    kind        reduced Palm beta-Ginibre process; only `palm` is accepted   (default \"palm\")
    beta        thinning parameter in (0, 1]                                   (default 1.0)
    radius      radius of the window b(O, radius)                              (default 2.0)
  [receiver]
    y           receiver coordinates [x, y], inside the window                 (default [0.5, 0.0])
  [attenuation]
    R           attenuation cutoff radius                                      (default 1.0)
    alpha       path-loss exponent, > 2                                        (default 4.0)
  [fading]
    kind        bounded | weibull_super | exponential | weibull_sub | pareto   (required)
    c           scale constant (all kinds except bounded)                      (required there)
    gamma       Weibull shape (weibull_super: > 1, weibull_sub: in (0, 1))     (required there)
    sup         essential supremum B (bounded)                                 (required there)
    shape_a     first Beta shape of the bounded law Z = B * Beta(a, b)        (default 2.0)
    shape_b     second Beta shape of the bounded law                          (default 2.0)
  [noise]
    w           noise power, > 0                                               (default 0.1)
  [threshold]
    tau         SINR threshold, > 0                                            (default 1.0)
  [estimation]
    estimator   crude | tilted | single_jump                                   (default \"crude\")
    n_reps      replications per grid point                                    (default 10000)
    x_grid      strictly increasing interference levels, at least 3            (one of x_grid, eps_grid)
    eps_grid    scalings eps; estimates P(eps * I >= x) at each eps           (one of x_grid, eps_grid)
    x           level used with eps_grid                                       (default 1.0)
    seed        master seed                     (default: --seed, then GINIBRENET_SEED, then 0)
    regime      bounded | weibull_super | exponential | subexp_family; when set, a slope
                report is written against the regime's limit constant          (default unset)
    tilt        fixed tilt for the tilted estimator                            (default: mean-shift rule)
    split       split level for the single_jump estimator                      (default x / 2)
  [output]
    directory   output directory, created if missing                           (default \".\")
    formats     list of output formats; only \"csv\" is supported              (default [\"csv\"])

  Files written: estimates.csv (x,eps,estimator,p,stderr,ci_lo,ci_hi,n_reps,seed)
  and, with a regime, slope_report.csv (x,log_p,predicted plus summary comments).";

/// A configuration problem, anchored to a line when one applies.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(l) => write!(f, "config line {l}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    process: ProcessSection,
    #[serde(default)]
    receiver: ReceiverSection,
    #[serde(default)]
    attenuation: AttenuationSection,
    fading: Option<FadingSection>,
    #[serde(default)]
    noise: NoiseSection,
    #[serde(default)]
    threshold: ThresholdSection,
    #[serde(default)]
    estimation: EstimationSection,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ProcessSection {
    kind: String,
    beta: f64,
    radius: f64,
}

impl Default for ProcessSection {
    fn default() -> Self {
        Self { kind: "palm".into(), beta: 1.0, radius: 2.0 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ReceiverSection {
    y: [f64; 2],
}

impl Default for ReceiverSection {
    fn default() -> Self {
        Self { y: [0.5, 0.0] }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct AttenuationSection {
    #[serde(rename = "R", alias = "r")]
    r: f64,
    alpha: f64,
}

impl Default for AttenuationSection {
    fn default() -> Self {
        Self { r: 1.0, alpha: 4.0 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FadingSection {
    kind: String,
    c: Option<f64>,
    gamma: Option<f64>,
    sup: Option<f64>,
    shape_a: Option<f64>,
    shape_b: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct NoiseSection {
    w: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self { w: 0.1 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ThresholdSection {
    tau: f64,
}

impl Default for ThresholdSection {
    fn default() -> Self {
        Self { tau: 1.0 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct EstimationSection {
    estimator: String,
    n_reps: usize,
    x_grid: Option<Vec<f64>>,
    eps_grid: Option<Vec<f64>>,
    x: f64,
    seed: Option<u64>,
    regime: Option<String>,
    tilt: Option<f64>,
    split: Option<f64>,
}

impl Default for EstimationSection {
    fn default() -> Self {
        Self {
            estimator: "crude".into(),
            n_reps: 10_000,
            x_grid: None,
            eps_grid: None,
            x: 1.0,
            seed: None,
            regime: None,
            tilt: None,
            split: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct OutputSection {
    directory: PathBuf,
    formats: Vec<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: ".".into(), formats: vec!["csv".into()] }
    }
}

/// One grid point: the interference level and the scaling it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub level: f64,
    pub eps: f64,
}

/// A validated model plus its estimation plan.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model: NetworkModel,
    pub estimator: Estimator,
    pub n_reps: usize,
    pub grid: Vec<GridPoint>,
    pub seed: Option<u64>,
    pub regime: Option<LdpRegime>,
    pub tilt: Option<f64>,
    pub split: Option<f64>,
    pub output_dir: PathBuf,
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of `key` inside `[section]`, or of the section header, if present.
fn locate(text: &str, section: &str, key: Option<&str>) -> Option<usize> {
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            if current == section {
                header = Some(i + 1);
            }
            continue;
        }
        if current == section {
            if let Some(k) = key {
                let lhs = line.split('=').next().unwrap_or("").trim();
                if lhs == k || (k == "R" && lhs == "r") {
                    return Some(i + 1);
                }
            }
        }
    }
    header
}

fn err(text: &str, section: &str, key: Option<&str>, message: impl Into<String>) -> ConfigError {
    ConfigError { line: locate(text, section, key), message: message.into() }
}

/// Builds a fading law from its kind and parameters.
pub fn fading_from(
    kind: &str,
    c: Option<f64>,
    gamma: Option<f64>,
    sup: Option<f64>,
    shape_a: Option<f64>,
    shape_b: Option<f64>,
) -> Result<FadingSpec, String> {
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| format!("fading kind '{kind}' requires '{name}'"));
    let spec = match kind {
        "bounded" => FadingSpec::bounded_beta(need(sup, "sup")?, shape_a.unwrap_or(2.0), shape_b.unwrap_or(2.0)),
        "weibull_super" => FadingSpec::weibull_super(need(c, "c")?, need(gamma, "gamma")?),
        "exponential" => FadingSpec::exponential(need(c, "c")?),
        "weibull_sub" => FadingSpec::weibull_sub(need(c, "c")?, need(gamma, "gamma")?),
        "pareto" => FadingSpec::pareto(need(c, "c")?),
        other => {
            return Err(format!(
                "unknown fading kind '{other}' (expected bounded, weibull_super, exponential, weibull_sub or pareto)"
            ))
        }
    };
    spec.map_err(|e| e.to_string())
}

fn regime_kind_matches(name: &str, kind: FadingKind) -> Option<bool> {
    let expected = match kind {
        FadingKind::Bounded => "bounded",
        FadingKind::WeibullSuper => "weibull_super",
        FadingKind::Exponential => "exponential",
        FadingKind::WeibullSub | FadingKind::Pareto => "subexp_family",
    };
    match name {
        "bounded" | "weibull_super" | "exponential" | "subexp_family" => Some(name == expected),
        _ => None,
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError {
            line: e.span().map(|s| line_of_offset(text, s.start)),
            message: e.message().to_string(),
        })?;

        let fading = raw.fading.ok_or_else(|| ConfigError {
            line: None,
            message: "missing required section [fading]".into(),
        })?;
        let spec = fading_from(&fading.kind, fading.c, fading.gamma, fading.sup, fading.shape_a, fading.shape_b)
            .map_err(|m| err(text, "fading", Some("kind"), m))?;

        let kind: ProcessKind =
            raw.process.kind.parse().map_err(|e: ginibrenet_core::Error| err(text, "process", Some("kind"), e.to_string()))?;
        if kind != ProcessKind::PalmBetaGinibre {
            return Err(err(
                text,
                "process",
                Some("kind"),
                format!("interference is defined under the reduced Palm process; kind must be 'palm', got '{kind}'"),
            ));
        }
        let window = Disk::centered(raw.process.radius).map_err(|e| err(text, "process", Some("radius"), e.to_string()))?;
        let model = NetworkModel::new(
            raw.process.beta,
            window,
            PlanarPoint::new(raw.receiver.y[0], raw.receiver.y[1]),
            raw.attenuation.r,
            raw.attenuation.alpha,
            spec,
            raw.noise.w,
            raw.threshold.tau,
        )
        .map_err(|e| {
            let m = e.to_string();
            let (section, key) = if m.contains("beta") {
                ("process", "beta")
            } else if m.contains("receiver") {
                ("receiver", "y")
            } else if m.contains("noise") {
                ("noise", "w")
            } else if m.contains("tau") {
                ("threshold", "tau")
            } else if m.contains("alpha") {
                ("attenuation", "alpha")
            } else {
                ("attenuation", "R")
            };
            err(text, section, Some(key), m)
        })?;

        let est = raw.estimation;
        let estimator: Estimator =
            est.estimator.parse().map_err(|e: ginibrenet_core::Error| err(text, "estimation", Some("estimator"), e.to_string()))?;
        estimator
            .check_compatible(&spec)
            .map_err(|e| err(text, "estimation", Some("estimator"), e.to_string()))?;
        if est.n_reps == 0 {
            return Err(err(text, "estimation", Some("n_reps"), "n_reps must be positive"));
        }
        let grid = match (est.x_grid, est.eps_grid) {
            (Some(_), Some(_)) => {
                return Err(err(text, "estimation", Some("eps_grid"), "give either x_grid or eps_grid, not both"))
            }
            (None, None) => return Err(err(text, "estimation", None, "one of x_grid or eps_grid is required")),
            (Some(xs), None) => {
                if xs.len() < 3 {
                    return Err(err(text, "estimation", Some("x_grid"), "x_grid needs at least 3 points for the regression"));
                }
                if !xs.iter().all(|x| x.is_finite() && *x > 0.0) || !xs.windows(2).all(|w| w[1] > w[0]) {
                    return Err(err(text, "estimation", Some("x_grid"), "x_grid must be positive and strictly increasing"));
                }
                xs.into_iter().map(|x| GridPoint { level: x, eps: 1.0 }).collect::<Vec<_>>()
            }
            (None, Some(es)) => {
                if es.len() < 3 {
                    return Err(err(text, "estimation", Some("eps_grid"), "eps_grid needs at least 3 points for the regression"));
                }
                if !(est.x.is_finite() && est.x > 0.0) {
                    return Err(err(text, "estimation", Some("x"), "x must be positive"));
                }
                if !es.iter().all(|e| e.is_finite() && *e > 0.0) || !es.windows(2).all(|w| w[1] != w[0]) {
                    return Err(err(text, "estimation", Some("eps_grid"), "eps_grid must be positive and free of repeats"));
                }
                es.into_iter().map(|e| GridPoint { level: est.x / e, eps: e }).collect()
            }
        };
        let regime = match est.regime {
            None => None,
            Some(name) => match regime_kind_matches(&name, spec.kind()) {
                None => return Err(err(text, "estimation", Some("regime"), format!("unknown regime '{name}'"))),
                Some(false) => {
                    return Err(err(
                        text,
                        "estimation",
                        Some("regime"),
                        format!("regime '{name}' does not match fading kind '{}'", spec.kind().as_str()),
                    ))
                }
                Some(true) => Some(
                    LdpRegime::from_fading(spec, raw.attenuation.r, raw.attenuation.alpha)
                        .map_err(|e| err(text, "estimation", Some("regime"), e.to_string()))?,
                ),
            },
        };
        if let Some(f) = raw.output.formats.iter().find(|f| f.as_str() != "csv") {
            return Err(err(text, "output", Some("formats"), format!("unsupported output format '{f}'")));
        }
        Ok(Self {
            model,
            estimator,
            n_reps: est.n_reps,
            grid,
            seed: est.seed,
            regime,
            tilt: est.tilt,
            split: est.split,
            output_dir: raw.output.directory,
        })
    }
}
