//! Run configuration: flat `key = value` text, one pair per line, `#`
//! comments. Zero-dependency parsing keeps golden outputs stable.

use std::fmt;
use std::path::PathBuf;

use oim_core::constitutive::LawSet;

#[derive(Clone, Debug, PartialEq)]
pub enum MeshSpec {
    Slab { nx: usize, ny: usize, length_1: f64, length_2: f64, height: f64 },
    File(PathBuf),
}

impl MeshSpec {
    pub fn slab(nx: usize, ny: usize, length_1: f64, length_2: f64, height: f64) -> Self {
        MeshSpec::Slab { nx, ny, length_1, length_2, height }
    }

    pub fn slab_dimensions(&self) -> Option<(usize, usize, f64, f64, f64)> {
        match *self {
            MeshSpec::Slab { nx, ny, length_1, length_2, height } => {
                Some((nx, ny, length_1, length_2, height))
            }
            MeshSpec::File(_) => None,
        }
    }
}

/// Name of a law family as written in config files: `sinh-bv` or
/// `power:<p>`.
#[derive(Clone, Debug, PartialEq)]
pub enum LawName {
    SinhButlerVolmer,
    Power(f64),
}

impl LawName {
    pub fn parse(name: &str) -> Result<Self, ConfigError> {
        if name == "sinh-bv" {
            return Ok(LawName::SinhButlerVolmer);
        }
        if let Some(rest) = name.strip_prefix("power:") {
            let p: f64 = rest
                .parse()
                .map_err(|_| ConfigError::BadValue { key: "law", reason: "exponent not a number" })?;
            if !(p > 1.0) || !p.is_finite() {
                return Err(ConfigError::BadValue { key: "law", reason: "exponent must exceed 1" });
            }
            return Ok(LawName::Power(p));
        }
        Err(ConfigError::BadValue { key: "law", reason: "expected sinh-bv or power:<p>" })
    }

    pub fn build(&self) -> LawSet {
        match *self {
            LawName::SinhButlerVolmer => LawSet::prototype(),
            // Exponent was range-checked at parse time.
            LawName::Power(p) => LawSet::power(p).expect("validated exponent"),
        }
    }

    pub fn as_str(&self) -> String {
        match self {
            LawName::SinhButlerVolmer => "sinh-bv".to_string(),
            LawName::Power(p) => format!("power:{p}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mesh: MeshSpec,
    pub law: LawName,
    pub dirichlet_a: f64,
    pub dirichlet_b: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub edge_quad_points: usize,
    /// Relative bound the diagnostic gaps must satisfy for exit code 0.
    pub gap_tol: f64,
    /// Bound on the solver-vs-oracle ∞-error for slab runs.
    pub oracle_tol: f64,
    pub output_prefix: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConfigError {
    Syntax { line: usize, reason: &'static str },
    UnknownKey { line: usize, key: String },
    DuplicateKey { line: usize, key: String },
    BadValue { key: &'static str, reason: &'static str },
    MissingKey { key: &'static str },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Syntax { line, reason } => write!(f, "line {line}: {reason}"),
            ConfigError::UnknownKey { line, key } => write!(f, "line {line}: unknown key '{key}'"),
            ConfigError::DuplicateKey { line, key } => {
                write!(f, "line {line}: duplicate key '{key}'")
            }
            ConfigError::BadValue { key, reason } => write!(f, "key '{key}': {reason}"),
            ConfigError::MissingKey { key } => write!(f, "missing required key '{key}'"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    /// Parses the documented key set:
    ///
    /// ```text
    /// mesh = slab | file          law = sinh-bv | power:<p>
    /// slab_nx, slab_ny            dirichlet_a, dirichlet_b
    /// slab_length1, slab_length2  tol, max_iter
    /// slab_height                 edge_quad_points
    /// mesh_file                   gap_tol, oracle_tol
    /// output_prefix
    /// ```
    ///
    /// The slab dimensions default to the unit slab; tolerances default to
    /// `tol = 1e-10`, `gap_tol = 1e-8`, `oracle_tol = 1e-8`.
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let mut pairs: Vec<(usize, String, String)> = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            };
            let content = content.trim();
            if content.is_empty() {
                continue;
            }
            let Some(eq) = content.find('=') else {
                return Err(ConfigError::Syntax { line, reason: "expected key = value" });
            };
            let key = content[..eq].trim().to_string();
            let value = content[eq + 1..].trim().to_string();
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Syntax { line, reason: "empty key or value" });
            }
            if pairs.iter().any(|(_, k2, _)| *k2 == key) {
                return Err(ConfigError::DuplicateKey { line, key });
            }
            pairs.push((line, key, value));
        }

        let known = [
            "mesh",
            "mesh_file",
            "slab_nx",
            "slab_ny",
            "slab_length1",
            "slab_length2",
            "slab_height",
            "law",
            "dirichlet_a",
            "dirichlet_b",
            "tol",
            "max_iter",
            "edge_quad_points",
            "gap_tol",
            "oracle_tol",
            "output_prefix",
        ];
        for (line, key, _) in &pairs {
            if !known.contains(&key.as_str()) {
                return Err(ConfigError::UnknownKey { line: *line, key: key.clone() });
            }
        }
        let get = |key: &str| pairs.iter().find(|(_, k, _)| k == key).map(|(_, _, v)| v.as_str());
        let get_f64 = |key: &'static str| -> Result<Option<f64>, ConfigError> {
            match get(key) {
                None => Ok(None),
                Some(v) => v
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| ConfigError::BadValue { key, reason: "not a number" }),
            }
        };
        let get_usize = |key: &'static str| -> Result<Option<usize>, ConfigError> {
            match get(key) {
                None => Ok(None),
                Some(v) => v
                    .parse::<usize>()
                    .map(Some)
                    .map_err(|_| ConfigError::BadValue { key, reason: "not a count" }),
            }
        };

        let mesh = match get("mesh") {
            Some("slab") | None => {
                let nx = get_usize("slab_nx")?.unwrap_or(1);
                let ny = get_usize("slab_ny")?.unwrap_or(1);
                let l1 = get_f64("slab_length1")?.unwrap_or(1.0);
                let l2 = get_f64("slab_length2")?.unwrap_or(1.0);
                let h = get_f64("slab_height")?.unwrap_or(1.0);
                MeshSpec::slab(nx, ny, l1, l2, h)
            }
            Some("file") => {
                let path = get("mesh_file")
                    .ok_or(ConfigError::MissingKey { key: "mesh_file" })?;
                MeshSpec::File(PathBuf::from(path))
            }
            Some(_) => {
                return Err(ConfigError::BadValue { key: "mesh", reason: "expected slab or file" })
            }
        };

        let law = LawName::parse(get("law").ok_or(ConfigError::MissingKey { key: "law" })?)?;
        let dirichlet_a =
            get_f64("dirichlet_a")?.ok_or(ConfigError::MissingKey { key: "dirichlet_a" })?;
        let dirichlet_b =
            get_f64("dirichlet_b")?.ok_or(ConfigError::MissingKey { key: "dirichlet_b" })?;
        let tol = get_f64("tol")?.unwrap_or(1e-10);
        if !(tol > 0.0) {
            return Err(ConfigError::BadValue { key: "tol", reason: "must be positive" });
        }
        let max_iter = get_usize("max_iter")?.unwrap_or(50);
        let edge_quad_points = get_usize("edge_quad_points")?.unwrap_or(2);
        let gap_tol = get_f64("gap_tol")?.unwrap_or(1e-8);
        let oracle_tol = get_f64("oracle_tol")?.unwrap_or(1e-8);
        let output_prefix = PathBuf::from(
            get("output_prefix").ok_or(ConfigError::MissingKey { key: "output_prefix" })?,
        );

        Ok(RunConfig {
            mesh,
            law,
            dirichlet_a,
            dirichlet_b,
            tol,
            max_iter,
            edge_quad_points,
            gap_tol,
            oracle_tol,
            output_prefix,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "\
# prototype run
mesh = slab
slab_nx = 2
slab_ny = 2
law = sinh-bv
dirichlet_a = 0.0
dirichlet_b = 3.0
tol = 1e-10
max_iter = 40
output_prefix = out/run
";

    #[test]
    fn parses_a_full_config() {
        let cfg = RunConfig::parse(GOOD).unwrap();
        assert_eq!(cfg.law, LawName::SinhButlerVolmer);
        let (nx, ny, l1, l2, h) = cfg.mesh.slab_dimensions().unwrap();
        assert_eq!((nx, ny), (2, 2));
        assert_eq!((l1, l2, h), (1.0, 1.0, 1.0));
        assert_eq!(cfg.tol, 1e-10);
        assert_eq!(cfg.max_iter, 40);
        assert_eq!(cfg.edge_quad_points, 2);
    }

    #[test]
    fn law_names_parse_and_reject() {
        assert_eq!(LawName::parse("power:3").unwrap(), LawName::Power(3.0));
        assert!(LawName::parse("power:0.5").is_err());
        assert!(LawName::parse("power:x").is_err());
        assert!(LawName::parse("ohm").is_err());
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        let text = GOOD.replace("max_iter = 40", "max_it = 40");
        assert!(matches!(
            RunConfig::parse(&text),
            Err(ConfigError::UnknownKey { .. })
        ));
        let text = format!("{GOOD}tol = 1e-8\n");
        assert!(matches!(
            RunConfig::parse(&text),
            Err(ConfigError::DuplicateKey { .. })
        ));
    }

    #[test]
    fn rejects_missing_law_and_bad_tol() {
        let text = GOOD.replace("law = sinh-bv\n", "");
        assert!(matches!(
            RunConfig::parse(&text),
            Err(ConfigError::MissingKey { key: "law" })
        ));
        let text = GOOD.replace("tol = 1e-10", "tol = 0");
        assert!(matches!(RunConfig::parse(&text), Err(ConfigError::BadValue { key: "tol", .. })));
    }

    #[test]
    fn file_mesh_needs_a_path() {
        let text = GOOD.replace("mesh = slab", "mesh = file");
        assert!(matches!(
            RunConfig::parse(&text),
            Err(ConfigError::MissingKey { key: "mesh_file" })
        ));
    }
}
