//! Run configuration: `[section]` headers with flat `key = value` lines.
//!
//! Values are resolved in the order defaults, config file, the
//! `WIGNER_OUTPUT_DIR` environment variable, then `--set key=value` flags.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use ini::Ini;
use wigner_core::fem1d::ElementOrder;
use wigner_core::potentials::dft::ScfConfig;
use wigner_core::solver::SolverConfig;

use crate::error::{CliError, Result};

pub const OUTPUT_DIR_ENV: &str = "WIGNER_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum System {
    /// `V = ω²x²/2`.
    Harmonic,
    /// `V = −1/|x|`.
    Hydrogen1d,
    /// Kohn–Sham potential of Hooke's atom, known in closed form.
    HookeKs,
    /// Two electrons with a contact interaction in `V = ω²x²/2`, solved by SCF.
    ContactHooke,
}

impl System {
    pub const ALL: [System; 4] = [
        System::Harmonic,
        System::Hydrogen1d,
        System::HookeKs,
        System::ContactHooke,
    ];

    pub fn name(self) -> &'static str {
        match self {
            System::Harmonic => "harmonic",
            System::Hydrogen1d => "hydrogen1d",
            System::HookeKs => "hooke_ks",
            System::ContactHooke => "contact_hooke",
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerSolver {
    Wigner,
    Schrodinger,
}

impl InnerSolver {
    pub fn name(self) -> &'static str {
        match self {
            InnerSolver::Wigner => "wigner",
            InnerSolver::Schrodinger => "schrodinger",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: System,
    pub omega: f64,
    pub solver: SolverConfig,
    pub scf: ScfConfig,
    pub inner: InnerSolver,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: System::Harmonic,
            omega: 1.0,
            solver: SolverConfig::default(),
            scf: ScfConfig::default(),
            inner: InnerSolver::Wigner,
            output_dir: PathBuf::from("out"),
        }
    }
}

pub struct KeySpec {
    pub section: &'static str,
    pub key: &'static str,
    pub doc: &'static str,
}

const fn spec(section: &'static str, key: &'static str, doc: &'static str) -> KeySpec {
    KeySpec { section, key, doc }
}

/// Every accepted key, in manifest order.
pub const KEYS: &[KeySpec] = &[
    spec("system", "system", "harmonic | hydrogen1d | hooke_ks | contact_hooke"),
    spec("system", "omega", "trap frequency for harmonic and contact_hooke"),
    spec(
        "solver",
        "truncation",
        "Hermite truncation K (coefficients f_0 .. f_2K)",
    ),
    spec("solver", "half_width", "domain is [-half_width, half_width]"),
    spec("solver", "h", "element size"),
    spec("solver", "order", "element order: 1 (linear) or 2 (quadratic)"),
    spec("solver", "quad_points", "Gauss points per element"),
    spec("solver", "dt", "imaginary time step"),
    spec("solver", "t_max", "final imaginary time"),
    spec("solver", "tol", "stop when the per-step change is at most tol"),
    spec("solver", "n_states", "number of lowest states"),
    spec("solver", "enforce_even", "restrict f_0 to even functions"),
    spec(
        "solver",
        "project",
        "re-impose the stationary Wigner equation each step",
    ),
    spec(
        "solver",
        "pin_origin",
        "hold f_0(0) = 0 (psi(0) = 0 in the reference solver)",
    ),
    spec("solver", "seed", "seed of the random initial state"),
    spec("scf", "alpha", "linear density mixing weight"),
    spec("scf", "scf_tol", "stop when max |rho_out - rho_in| is at most scf_tol"),
    spec("scf", "scf_max_iter", "maximum SCF iterations"),
    spec("scf", "interacting", "include Hartree and LDA exchange-correlation"),
    spec("scf", "inner", "Kohn-Sham eigensolver: wigner | schrodinger"),
    spec("output", "output_dir", "directory for CSV output and the manifest"),
];

fn key_spec(key: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|k| k.key == key)
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{value}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(CliError::Config(format!(
            "`{key}`: expected true or false, got `{other}`"
        ))),
    }
}

impl RunConfig {
    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let s = &mut self.solver;
        match key {
            "system" => {
                self.system = System::ALL
                    .into_iter()
                    .find(|sys| sys.name() == value.trim())
                    .ok_or_else(|| {
                        let names: Vec<_> = System::ALL.iter().map(|s| s.name()).collect();
                        CliError::Config(format!(
                            "unknown system `{value}` (expected one of {})",
                            names.join(", ")
                        ))
                    })?
            }
            "omega" => self.omega = parse(key, value)?,
            "truncation" => s.truncation = parse(key, value)?,
            "half_width" => s.half_width = parse(key, value)?,
            "h" => s.h = parse(key, value)?,
            "order" => {
                let p: usize = parse(key, value)?;
                s.order = ElementOrder::from_degree(p).map_err(|e| CliError::Config(format!("`order`: {e}")))?;
            }
            "quad_points" => s.quad_points = parse(key, value)?,
            "dt" => s.dt = parse(key, value)?,
            "t_max" => s.t_max = parse(key, value)?,
            "tol" => s.tol = parse(key, value)?,
            "n_states" => s.n_states = parse(key, value)?,
            "enforce_even" => s.enforce_even = parse_bool(key, value)?,
            "project" => s.project = parse_bool(key, value)?,
            "pin_origin" => s.pin_origin = parse_bool(key, value)?,
            "seed" => s.seed = parse(key, value)?,
            "alpha" => self.scf.alpha = parse(key, value)?,
            "scf_tol" => self.scf.tol = parse(key, value)?,
            "scf_max_iter" => self.scf.max_iter = parse(key, value)?,
            "interacting" => self.scf.interacting = parse_bool(key, value)?,
            "inner" => {
                self.inner = match value.trim() {
                    "wigner" => InnerSolver::Wigner,
                    "schrodinger" => InnerSolver::Schrodinger,
                    other => {
                        return Err(CliError::Config(format!(
                            "unknown inner solver `{other}` (expected wigner or schrodinger)"
                        )))
                    }
                }
            }
            "output_dir" => self.output_dir = PathBuf::from(value.trim()),
            other => return Err(CliError::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Text form of one key; floats use the shortest representation that
    /// parses back to the same value.
    pub fn get(&self, key: &str) -> Option<String> {
        let s = &self.solver;
        Some(match key {
            "system" => self.system.name().to_string(),
            "omega" => self.omega.to_string(),
            "truncation" => s.truncation.to_string(),
            "half_width" => s.half_width.to_string(),
            "h" => s.h.to_string(),
            "order" => s.order.degree().to_string(),
            "quad_points" => s.quad_points.to_string(),
            "dt" => s.dt.to_string(),
            "t_max" => s.t_max.to_string(),
            "tol" => s.tol.to_string(),
            "n_states" => s.n_states.to_string(),
            "enforce_even" => s.enforce_even.to_string(),
            "project" => s.project.to_string(),
            "pin_origin" => s.pin_origin.to_string(),
            "seed" => s.seed.to_string(),
            "alpha" => self.scf.alpha.to_string(),
            "scf_tol" => self.scf.tol.to_string(),
            "scf_max_iter" => self.scf.max_iter.to_string(),
            "interacting" => self.scf.interacting.to_string(),
            "inner" => self.inner.name().to_string(),
            "output_dir" => self.output_dir.display().to_string(),
            _ => return None,
        })
    }

    /// Applies a config file. Keys must sit under their own section;
    /// unknown keys, misplaced keys and duplicates are rejected.
    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        let ini = Ini::load_from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let mut seen = Vec::new();
        for (section, props) in ini.iter() {
            for (key, value) in props.iter() {
                let spec = key_spec(key).ok_or_else(|| CliError::Config(format!("unknown key `{key}`")))?;
                match section {
                    Some(sec) if sec == spec.section => {}
                    Some(sec) => {
                        return Err(CliError::Config(format!(
                            "key `{key}` belongs in [{}], found in [{sec}]",
                            spec.section
                        )))
                    }
                    None => {
                        return Err(CliError::Config(format!(
                            "key `{key}` must sit under a [{}] header",
                            spec.section
                        )))
                    }
                }
                if seen.contains(&key) {
                    return Err(CliError::Config(format!("duplicate key `{key}`")));
                }
                seen.push(key);
                self.set(key, value)?;
            }
        }
        if let Some(sec) = ini.sections().flatten().find(|s| !KEYS.iter().any(|k| k.section == *s)) {
            return Err(CliError::Config(format!("unknown section [{sec}]")));
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        self.apply_str(&text).map_err(|e| {
            CliError::Config(format!(
                "{}: {}",
                path.display(),
                e.to_string().trim_start_matches("config: ")
            ))
        })
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("expected key=value, got `{assignment}`")))?;
        self.set(key.trim(), value)
    }

    /// Defaults, then the file, then the environment, then overrides.
    pub fn resolve(file: Option<&Path>, env_output_dir: Option<String>, overrides: &[String]) -> Result<Self> {
        let mut config = RunConfig::default();
        if let Some(path) = file {
            config.apply_file(path)?;
        }
        if let Some(dir) = env_output_dir.filter(|d| !d.is_empty()) {
            config.output_dir = PathBuf::from(dir);
        }
        for o in overrides {
            config.apply_override(o)?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |e: wigner_core::Error| CliError::Config(e.to_string());
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(CliError::Config(format!(
                "`omega` must be positive, got {}",
                self.omega
            )));
        }
        self.solver.validate().map_err(bad)?;
        self.solver.mesh().map_err(bad)?;
        self.scf.validate().map_err(bad)?;
        Ok(())
    }

    /// The config in file form; each key is preceded by its description
    /// when `documented` is set.
    pub fn to_ini(&self, documented: bool) -> String {
        let mut out = String::new();
        let mut section = "";
        for k in KEYS {
            if k.section != section {
                if !section.is_empty() {
                    out.push('\n');
                }
                out.push_str(&format!("[{}]\n", k.section));
                section = k.section;
            }
            if documented {
                out.push_str(&format!("; {}\n", k.doc));
            }
            out.push_str(&format!("{} = {}\n", k.key, self.get(k.key).expect("listed key")));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_key_round_trips() {
        let config = RunConfig::default();
        for k in KEYS {
            let text = config.get(k.key).unwrap();
            let mut other = RunConfig::default();
            other.set(k.key, &text).unwrap();
            assert_eq!(other, config, "{}", k.key);
        }
        let mut parsed = RunConfig {
            system: System::Hydrogen1d,
            ..Default::default()
        };
        parsed.apply_str(&config.to_ini(true)).unwrap();
        assert_eq!(parsed, config);
    }

    #[test]
    fn odd_floats_survive_the_manifest() {
        let mut config = RunConfig::default();
        config.solver.h = 0.1 + 0.2;
        config.scf.alpha = 1.0 / 3.0;
        let mut back = RunConfig::default();
        back.apply_str(&config.to_ini(false)).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn rejects_bad_input() {
        let mut c = RunConfig::default();
        assert!(c.apply_str("[solver]\nbogus = 1\n").is_err());
        assert!(c.apply_str("[system]\nh = 0.1\n").is_err());
        assert!(c.apply_str("h = 0.1\n").is_err());
        assert!(c.apply_str("[solver]\nh = 0.1\nh = 0.2\n").is_err());
        assert!(c.apply_str("[extra]\n").is_err());
        assert!(c.set("system", "helium").is_err());
        assert!(c.set("order", "3").is_err());
        assert!(c.set("project", "maybe").is_err());
        assert!(c.apply_override("h").is_err());
    }

    #[test]
    fn precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.ini");
        fs::write(
            &path,
            "[solver]\nh = 0.05\ntruncation = 3\n[output]\noutput_dir = from_file\n",
        )
        .unwrap();
        let c = RunConfig::resolve(Some(&path), None, &[]).unwrap();
        assert_eq!((c.solver.h, c.solver.truncation), (0.05, 3));
        assert_eq!(c.output_dir, PathBuf::from("from_file"));
        let c = RunConfig::resolve(Some(&path), Some("from_env".into()), &[]).unwrap();
        assert_eq!(c.output_dir, PathBuf::from("from_env"));
        let c = RunConfig::resolve(
            Some(&path),
            Some("from_env".into()),
            &["output_dir=from_flag".into(), "h=0.025".into()],
        )
        .unwrap();
        assert_eq!(c.output_dir, PathBuf::from("from_flag"));
        assert_eq!(c.solver.h, 0.025);
        assert!(RunConfig::resolve(None, None, &["dt=-1".into()]).is_err());
    }
}
