//! Run configuration: JSON file, command-line overrides and validation.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use lindblad_jc::{BlockDensity64, Complex64, FockDim, Matrix64, Params64};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    OracleExpm,
    OracleRk4,
    Split2,
    Split3,
    DiagonalOnly,
    ClosedFormExample,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::OracleExpm,
        Method::OracleRk4,
        Method::Split2,
        Method::Split3,
        Method::DiagonalOnly,
        Method::ClosedFormExample,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::OracleExpm => "oracle-expm",
            Method::OracleRk4 => "oracle-rk4",
            Method::Split2 => "split2",
            Method::Split3 => "split3",
            Method::DiagonalOnly => "diagonal-only",
            Method::ClosedFormExample => "closed-form-example",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.name() == s)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Option<OutputFormat> {
        match s {
            "csv" => Some(OutputFormat::Csv),
            "json" => Some(OutputFormat::Json),
            _ => None,
        }
    }
}

/// Step length used by the split methods between output times.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SplitStep {
    /// Repeated steps with `h·max(Ω, μ, ω₀) ≤ 0.1`.
    Auto,
    /// Repeated steps no longer than the given `h`.
    Fixed(f64),
    /// A single step from `t = 0` to each output time.
    OneShot,
}

impl SplitStep {
    pub fn parse(s: &str) -> Option<SplitStep> {
        match s {
            "auto" => Some(SplitStep::Auto),
            "one-shot" => Some(SplitStep::OneShot),
            _ => s.parse::<f64>().ok().map(SplitStep::Fixed),
        }
    }
}

impl Serialize for SplitStep {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            SplitStep::Auto => s.serialize_str("auto"),
            SplitStep::OneShot => s.serialize_str("one-shot"),
            SplitStep::Fixed(h) => s.serialize_f64(*h),
        }
    }
}

impl<'de> Deserialize<'de> for SplitStep {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Number(h) => Ok(SplitStep::Fixed(h)),
            Repr::Text(t) => SplitStep::parse(&t)
                .filter(|s| !matches!(s, SplitStep::Fixed(_)))
                .ok_or_else(|| {
                    serde::de::Error::custom(format!("expected a number, \"auto\" or \"one-shot\", got \"{t}\""))
                }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub omega0: f64,
    #[serde(rename = "Omega")]
    pub coupling: f64,
    pub mu: f64,
    pub nu: f64,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    /// `½ diag(|0⟩⟨0|, |α⟩⟨α|)`
    VacuumExcited {
        alpha: [f64; 2],
    },
    /// `diag(|α⟩⟨α|, 0)`
    CoherentDiagonal {
        alpha: [f64; 2],
    },
    CustomFile {
        path: PathBuf,
    },
}

/// Fully resolved run configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: ParamsConfig,
    pub initial: InitialConfig,
    pub t_max: f64,
    pub n_points: usize,
    pub methods: Vec<Method>,
    /// Not part of the embedded description: two runs differing only in
    /// where they write produce identical files.
    #[serde(skip)]
    pub output: PathBuf,
    pub format: OutputFormat,
    pub rk4_dt: f64,
    pub split_step: SplitStep,
}

/// The JSON file form; every field is optional and falls back to the
/// defaults of [`RunConfig::default_with_output`].
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub params: Option<ParamsFile>,
    pub initial: Option<InitialConfig>,
    pub t_max: Option<f64>,
    pub n_points: Option<usize>,
    pub methods: Option<Vec<Method>>,
    pub output: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub rk4_dt: Option<f64>,
    pub split_step: Option<SplitStep>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub omega0: Option<f64>,
    #[serde(rename = "Omega")]
    pub coupling: Option<f64>,
    pub mu: Option<f64>,
    pub nu: Option<f64>,
    pub dim: Option<usize>,
}

/// Values given on the command line; they take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub output: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub methods: Option<Vec<Method>>,
    pub t_max: Option<f64>,
    pub n_points: Option<usize>,
    pub dim: Option<usize>,
    pub alpha: Option<[f64; 2]>,
    pub omega0: Option<f64>,
    pub coupling: Option<f64>,
    pub mu: Option<f64>,
    pub nu: Option<f64>,
    pub initial_kind: Option<String>,
    pub initial_file: Option<PathBuf>,
    pub rk4_dt: Option<f64>,
    pub split_step: Option<SplitStep>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut file = Self::parse(&text)?;
        // custom state paths are relative to the config file
        if let Some(InitialConfig::CustomFile { path: p }) = &mut file.initial {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(file)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "<root>".to_string() } else { path };
            CliError::Config(format!("field `{field}`: {}", e.inner()))
        })
    }
}

impl RunConfig {
    pub fn default_with_output(output: PathBuf) -> Self {
        RunConfig {
            params: ParamsConfig {
                omega0: 1.0,
                coupling: 1.0,
                mu: 0.2,
                nu: 0.1,
                dim: 30,
            },
            initial: InitialConfig::VacuumExcited { alpha: [1.0, 0.0] },
            t_max: 2.0,
            n_points: 21,
            methods: vec![Method::OracleExpm, Method::Split2],
            output,
            format: OutputFormat::Csv,
            rk4_dt: 1e-3,
            split_step: SplitStep::Auto,
        }
    }

    /// Defaults, then the file, then the command line.
    pub fn resolve(file: ConfigFile, over: Overrides) -> CliResult<Self> {
        let output =
            over.output.clone().or(file.output.clone()).ok_or_else(|| {
                CliError::Config("field `output`: no output path given (use --out or \"output\")".into())
            })?;
        let mut cfg = RunConfig::default_with_output(output);
        if let Some(p) = file.params {
            let q = &mut cfg.params;
            q.omega0 = p.omega0.unwrap_or(q.omega0);
            q.coupling = p.coupling.unwrap_or(q.coupling);
            q.mu = p.mu.unwrap_or(q.mu);
            q.nu = p.nu.unwrap_or(q.nu);
            q.dim = p.dim.unwrap_or(q.dim);
        }
        let format_given = over.format.is_some() || file.format.is_some();
        cfg.initial = file.initial.unwrap_or(cfg.initial);
        cfg.t_max = file.t_max.unwrap_or(cfg.t_max);
        cfg.n_points = file.n_points.unwrap_or(cfg.n_points);
        cfg.methods = file.methods.unwrap_or(cfg.methods);
        cfg.format = file.format.unwrap_or(cfg.format);
        cfg.rk4_dt = file.rk4_dt.unwrap_or(cfg.rk4_dt);
        cfg.split_step = file.split_step.unwrap_or(cfg.split_step);

        let q = &mut cfg.params;
        q.omega0 = over.omega0.unwrap_or(q.omega0);
        q.coupling = over.coupling.unwrap_or(q.coupling);
        q.mu = over.mu.unwrap_or(q.mu);
        q.nu = over.nu.unwrap_or(q.nu);
        q.dim = over.dim.unwrap_or(q.dim);
        cfg.t_max = over.t_max.unwrap_or(cfg.t_max);
        cfg.n_points = over.n_points.unwrap_or(cfg.n_points);
        cfg.methods = over.methods.clone().unwrap_or(cfg.methods);
        cfg.format = over.format.unwrap_or(cfg.format);
        cfg.rk4_dt = over.rk4_dt.unwrap_or(cfg.rk4_dt);
        cfg.split_step = over.split_step.unwrap_or(cfg.split_step);
        cfg.initial = resolve_initial(cfg.initial, &over)?;
        if !format_given && cfg.output.extension().is_some_and(|e| e == "json") {
            cfg.format = OutputFormat::Json;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |field: &str, msg: String| Err(CliError::Config(format!("field `{field}`: {msg}")));
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return bad("t_max", format!("must be positive, got {}", self.t_max));
        }
        if self.n_points < 2 {
            return bad("n_points", format!("must be at least 2, got {}", self.n_points));
        }
        if self.methods.is_empty() {
            return bad("methods", "at least one method is required".into());
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return bad("methods", format!("{m} is listed twice"));
            }
        }
        if self.methods.contains(&Method::ClosedFormExample)
            && !matches!(self.initial, InitialConfig::VacuumExcited { .. })
        {
            return bad(
                "methods",
                "closed-form-example needs the vacuum_excited initial state".into(),
            );
        }
        if !(self.rk4_dt.is_finite() && self.rk4_dt > 0.0) {
            return bad("rk4_dt", format!("must be positive, got {}", self.rk4_dt));
        }
        if let SplitStep::Fixed(h) = self.split_step {
            if !(h.is_finite() && h > 0.0) {
                return bad("split_step", format!("must be positive, got {h}"));
            }
        }
        match &self.initial {
            InitialConfig::VacuumExcited { alpha } | InitialConfig::CoherentDiagonal { alpha } => {
                if !alpha.iter().all(|a| a.is_finite()) {
                    return bad("initial.alpha", "must be finite".into());
                }
            }
            InitialConfig::CustomFile { .. } => {}
        }
        self.model_params()?;
        Ok(())
    }

    pub fn model_params(&self) -> CliResult<Params64> {
        let q = &self.params;
        let dim = FockDim::new(q.dim).map_err(|e| CliError::Config(format!("field `params.dim`: {e}")))?;
        Params64::new(q.omega0, q.coupling, q.mu, q.nu, dim)
            .map_err(|e| CliError::Config(format!("field `params`: {e}")))
    }

    pub fn alpha(&self) -> Option<Complex64> {
        match self.initial {
            InitialConfig::VacuumExcited { alpha } | InitialConfig::CoherentDiagonal { alpha } => {
                Some(Complex64::new(alpha[0], alpha[1]))
            }
            InitialConfig::CustomFile { .. } => None,
        }
    }

    pub fn initial_state(&self) -> CliResult<BlockDensity64> {
        let d = self.model_params()?.dim;
        match &self.initial {
            InitialConfig::VacuumExcited { alpha } => Ok(lindblad_jc::example_initial_state(
                Complex64::new(alpha[0], alpha[1]),
                d,
            )?),
            InitialConfig::CoherentDiagonal { alpha } => {
                let coh = lindblad_jc::fock::coherent_state(Complex64::new(alpha[0], alpha[1]), d)?;
                Ok(BlockDensity64::diagonal(
                    coh.projector(),
                    Matrix64::zeros(d.get(), d.get()),
                )?)
            }
            InitialConfig::CustomFile { path } => load_custom_state(path, d),
        }
    }

    /// Compact JSON of the resolved configuration.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("configuration serializes")
    }
}

fn resolve_initial(current: InitialConfig, over: &Overrides) -> CliResult<InitialConfig> {
    let alpha_now = match &current {
        InitialConfig::VacuumExcited { alpha } | InitialConfig::CoherentDiagonal { alpha } => *alpha,
        InitialConfig::CustomFile { .. } => [1.0, 0.0],
    };
    let alpha = over.alpha.unwrap_or(alpha_now);
    let kind = over.initial_kind.as_deref();
    Ok(match kind {
        Some("vacuum-excited") | Some("vacuum_excited") => InitialConfig::VacuumExcited { alpha },
        Some("coherent-diagonal") | Some("coherent_diagonal") => InitialConfig::CoherentDiagonal { alpha },
        Some("custom-file") | Some("custom_file") => {
            let path = over
                .initial_file
                .clone()
                .ok_or_else(|| CliError::Config("field `initial.path`: --initial custom-file needs --initial-file".into()))?;
            InitialConfig::CustomFile { path }
        }
        Some(other) => {
            return Err(CliError::Config(format!(
                "field `initial.kind`: unknown initial state \"{other}\" (expected vacuum-excited, coherent-diagonal or custom-file)"
            )))
        }
        None => match (current, &over.initial_file) {
            (_, Some(path)) => InitialConfig::CustomFile { path: path.clone() },
            (InitialConfig::VacuumExcited { .. }, None) => InitialConfig::VacuumExcited { alpha },
            (InitialConfig::CoherentDiagonal { .. }, None) => InitialConfig::CoherentDiagonal { alpha },
            (custom, None) => custom,
        },
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CustomState {
    dim: usize,
    rho00: Vec<Vec<[f64; 2]>>,
    rho01: Vec<Vec<[f64; 2]>>,
    rho10: Vec<Vec<[f64; 2]>>,
    rho11: Vec<Vec<[f64; 2]>>,
}

/// Reads a block density stored as `{"dim": d, "rho00": [[[re, im], …], …], …}`.
pub fn load_custom_state(path: &Path, dim: FockDim) -> CliResult<BlockDensity64> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let state: CustomState = serde_path_to_error::deserialize(de)
        .map_err(|e| CliError::Config(format!("{}: field `{}`: {}", path.display(), e.path(), e.inner())))?;
    if state.dim != dim.get() {
        return Err(CliError::Config(format!(
            "{}: field `dim`: state has cutoff {} but params.dim is {}",
            path.display(),
            state.dim,
            dim
        )));
    }
    let block = |name: &str, rows: &[Vec<[f64; 2]>]| -> CliResult<Matrix64> {
        let n = dim.get();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(CliError::Config(format!(
                "{}: field `{name}`: expected a {n}x{n} array",
                path.display()
            )));
        }
        Ok(Matrix64::from_fn(n, n, |i, j| {
            Complex64::new(rows[i][j][0], rows[i][j][1])
        }))
    };
    Ok(BlockDensity64::new(
        block("rho00", &state.rho00)?,
        block("rho01", &state.rho01)?,
        block("rho10", &state.rho10)?,
        block("rho11", &state.rho11)?,
    )?)
}

/// Writes a block density in the format read by [`load_custom_state`].
pub fn custom_state_json(rho: &BlockDensity64) -> String {
    let block = |m: &Matrix64| -> serde_json::Value {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .into()
    };
    let value = serde_json::json!({
        "dim": rho.dim().get(),
        "rho00": block(rho.block(0, 0)),
        "rho01": block(rho.block(0, 1)),
        "rho10": block(rho.block(1, 0)),
        "rho11": block(rho.block(1, 1)),
    });
    value.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(text: &str) -> CliResult<RunConfig> {
        RunConfig::resolve(ConfigFile::parse(text)?, Overrides::default())
    }

    #[test]
    fn full_file_round_trip() {
        let text = r#"{
            "params": {"omega0": 1.0, "Omega": 0.5, "mu": 0.3, "nu": 0.1, "dim": 12},
            "initial": {"kind": "coherent_diagonal", "alpha": [0.5, -0.5]},
            "t_max": 3.0, "n_points": 4, "methods": ["oracle-rk4", "split3"],
            "output": "out.json", "rk4_dt": 0.01, "split_step": "one-shot"
        }"#;
        let cfg = resolve(text).unwrap();
        assert_eq!(cfg.params.coupling, 0.5);
        assert_eq!(cfg.format, OutputFormat::Json);
        assert_eq!(cfg.split_step, SplitStep::OneShot);
        assert_eq!(cfg.methods, vec![Method::OracleRk4, Method::Split3]);
        let json = cfg.to_json();
        assert!(json.contains("\"Omega\":0.5") && json.contains("\"kind\":\"coherent_diagonal\""));
        assert!(!json.contains("out.json"));
    }

    #[test]
    fn errors_name_the_field() {
        let err = resolve(r#"{"params": {"mu": "fast"}, "output": "x.csv"}"#).unwrap_err();
        assert!(err.to_string().contains("params.mu"), "{err}");
        let err = resolve(r#"{"n_point": 3, "output": "x.csv"}"#).unwrap_err();
        assert!(err.to_string().contains("n_point"), "{err}");
        let err = resolve(r#"{"n_points": 1, "output": "x.csv"}"#).unwrap_err();
        assert!(err.to_string().contains("n_points"), "{err}");
        let err = resolve(r#"{"params": {"mu": 0.1, "nu": 0.2}, "output": "x.csv"}"#).unwrap_err();
        assert!(
            err.to_string().contains("params") && err.to_string().contains("mu"),
            "{err}"
        );
        let err = resolve(r#"{"methods": ["split4"], "output": "x.csv"}"#).unwrap_err();
        assert!(err.to_string().contains("methods"), "{err}");
        let err = resolve(r#"{"t_max": 0}"#).unwrap_err();
        assert!(err.to_string().contains("output"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn closed_form_needs_example_state() {
        let err = resolve(
            r#"{"initial": {"kind": "coherent_diagonal", "alpha": [1, 0]}, "methods": ["closed-form-example"], "output": "x.csv"}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("closed-form-example"));
    }

    #[test]
    fn overrides_win() {
        let file = ConfigFile::parse(r#"{"params": {"dim": 10}, "output": "a.csv"}"#).unwrap();
        let over = Overrides {
            dim: Some(14),
            alpha: Some([0.5, 0.0]),
            split_step: Some(SplitStep::Fixed(0.05)),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(file, over).unwrap();
        assert_eq!(cfg.params.dim, 14);
        assert_eq!(cfg.initial, InitialConfig::VacuumExcited { alpha: [0.5, 0.0] });
        assert_eq!(cfg.split_step, SplitStep::Fixed(0.05));
    }

    #[test]
    fn split_step_forms() {
        assert_eq!(SplitStep::parse("0.1"), Some(SplitStep::Fixed(0.1)));
        assert_eq!(SplitStep::parse("one-shot"), Some(SplitStep::OneShot));
        assert!(ConfigFile::parse(r#"{"split_step": "sometimes"}"#).is_err());
        assert!(ConfigFile::parse(r#"{"split_step": "0.1"}"#).is_err());
    }

    #[test]
    fn custom_state_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.json");
        let rho = lindblad_jc::example_initial_state(Complex64::new(0.3, 0.1), FockDim::new(8).unwrap()).unwrap();
        fs::write(&path, custom_state_json(&rho)).unwrap();
        assert_eq!(load_custom_state(&path, rho.dim()).unwrap(), rho);
        let err = load_custom_state(&path, FockDim::new(9).unwrap()).unwrap_err();
        assert!(err.to_string().contains("dim"));
    }
}
