//! Flat `key = value` run configuration. Later sources win: built-in
//! defaults, then the config file, then command-line flags.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::anchor::{linear_schedule, InitMode, PipelineConfig, PostprocessMode};
use crate::error::{Error, Result};
use crate::pointcloud::AdaptiveKnnParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    /// Cloud for `.xyz`, `.txt`, `.pts` and `.csv`, mesh otherwise.
    Auto,
    Mesh,
    Cloud,
}

impl InputKind {
    pub fn name(self) -> &'static str {
        match self {
            InputKind::Auto => "auto",
            InputKind::Mesh => "mesh",
            InputKind::Cloud => "cloud",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "auto" => Some(InputKind::Auto),
            "mesh" => Some(InputKind::Mesh),
            "cloud" => Some(InputKind::Cloud),
            _ => None,
        }
    }

    /// Concrete kind for a file.
    pub fn resolve(self, path: &Path) -> InputKind {
        match self {
            InputKind::Auto => {
                let ext = path
                    .extension()
                    .and_then(|e| e.to_str())
                    .unwrap_or("")
                    .to_ascii_lowercase();
                if matches!(ext.as_str(), "xyz" | "txt" | "pts" | "csv") {
                    InputKind::Cloud
                } else {
                    InputKind::Mesh
                }
            }
            k => k,
        }
    }
}

/// Everything a command needs besides its positional paths.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub pipeline: PipelineConfig,
    pub knn: AdaptiveKnnParams,
    pub kind: InputKind,
    /// 0 uses every core.
    pub threads: usize,
    /// Record wall-clock seconds in log.csv; off keeps outputs bit-identical
    /// across runs.
    pub timing: bool,
    pub init_map: Option<PathBuf>,
    epsilon_start: f64,
    epsilon_end: f64,
    epsilon_list: Option<Vec<f64>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            pipeline: PipelineConfig::default(),
            knn: AdaptiveKnnParams::default(),
            kind: InputKind::Auto,
            threads: 0,
            timing: false,
            init_map: None,
            epsilon_start: 5.0,
            epsilon_end: 1.0,
            epsilon_list: None,
        }
    }
}

/// Every key with its help text and whether its default comes from the
/// method description.
pub const KEYS: &[(&str, &str, bool)] = &[
    ("outer_iters", "outer iterations", true),
    (
        "epsilon_start",
        "distortion tolerance of the first iteration",
        true,
    ),
    (
        "epsilon_end",
        "distortion tolerance of the last iteration",
        true,
    ),
    (
        "epsilon_schedule",
        "explicit comma-separated tolerances, overrides start/end",
        false,
    ),
    ("distortion_ring", "ring depth of distortion balls", true),
    ("sparsity_ring", "ring depth of anchor neighborhoods", true),
    ("mu", "weight of the mass term", false),
    ("step0", "first projected-gradient step", true),
    (
        "inner_iters",
        "solver iterations per outer iteration",
        false,
    ),
    (
        "tol",
        "relative objective decrease that stops the solver",
        false,
    ),
    ("postprocess", "geodesic_sig or hks", false),
    ("init", "shot_like, random or provided", true),
    ("init_map", "initial map CSV for init = provided", false),
    ("seed", "random seed", false),
    (
        "shot_radius_factor",
        "descriptor radius in mean edge lengths",
        false,
    ),
    ("hks_eigs", "eigenpairs for heat kernel signatures", true),
    ("hks_time", "heat kernel diffusion time", true),
    (
        "signature_anchors",
        "anchors used by post-processing signatures",
        false,
    ),
    ("knn_k0", "initial neighborhood size for clouds", true),
    ("knn_ratio", "flatness threshold lambda3/lambda1", true),
    ("knn_shrink", "points dropped per shrink step", true),
    ("knn_min", "smallest neighborhood size", false),
    ("kind", "auto, mesh or cloud", false),
    ("threads", "worker threads, 0 for all cores", false),
    ("timing", "record wall-clock seconds in log.csv", false),
];

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

fn float(key: &str, v: &str) -> Result<f64> {
    let x: f64 = num(key, v)?;
    if !x.is_finite() {
        return Err(Error::Config(format!(
            "{key}: value must be finite, got {v:?}"
        )));
    }
    Ok(x)
}

fn boolean(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!(
            "{key}: expected true or false, got {v:?}"
        ))),
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let p = &mut self.pipeline;
        let v = value.trim();
        match key {
            "outer_iters" => p.outer_iters = num(key, v)?,
            "epsilon_start" => self.epsilon_start = float(key, v)?,
            "epsilon_end" => self.epsilon_end = float(key, v)?,
            "epsilon_schedule" => {
                self.epsilon_list = if v.is_empty() {
                    None
                } else {
                    Some(v.split(',').map(|x| float(key, x)).collect::<Result<_>>()?)
                };
            }
            "distortion_ring" => p.distortion_ring = num(key, v)?,
            "sparsity_ring" => p.sparsity_ring = num(key, v)?,
            "mu" => p.mu = float(key, v)?,
            "step0" => p.step0 = float(key, v)?,
            "inner_iters" => p.inner_iters = num(key, v)?,
            "tol" => p.tol = float(key, v)?,
            "postprocess" => {
                p.postprocess = PostprocessMode::parse(v).ok_or_else(|| {
                    Error::Config(format!(
                        "postprocess: expected geodesic_sig or hks, got {v:?}"
                    ))
                })?
            }
            "init" => {
                p.init = InitMode::parse(v).ok_or_else(|| {
                    Error::Config(format!(
                        "init: expected shot_like, random or provided, got {v:?}"
                    ))
                })?
            }
            "init_map" => {
                self.init_map = if v.is_empty() {
                    None
                } else {
                    Some(PathBuf::from(v))
                }
            }
            "seed" => p.seed = num(key, v)?,
            "shot_radius_factor" => p.shot_radius_factor = float(key, v)?,
            "hks_eigs" => p.hks_eigs = num(key, v)?,
            "hks_time" => p.hks_time = float(key, v)?,
            "signature_anchors" => p.signature_anchors = num(key, v)?,
            "knn_k0" => self.knn.k0 = num(key, v)?,
            "knn_ratio" => self.knn.ratio = float(key, v)?,
            "knn_shrink" => self.knn.shrink = num(key, v)?,
            "knn_min" => self.knn.k_min = num(key, v)?,
            "kind" => {
                self.kind = InputKind::parse(v).ok_or_else(|| {
                    Error::Config(format!("kind: expected auto, mesh or cloud, got {v:?}"))
                })?
            }
            "threads" => self.threads = num(key, v)?,
            "timing" => self.timing = boolean(key, v)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines. Blank lines and `#` comments are
    /// ignored; `origin` names the source in errors.
    pub fn apply_text(&mut self, text: &str, origin: &Path) -> Result<()> {
        for (k, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "{}:{}: expected key = value, got {line:?}",
                    origin.display(),
                    k + 1
                ))
            })?;
            self.set(key.trim(), value).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("{}:{}: {m}", origin.display(), k + 1)),
                e => e,
            })?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text, path)
    }

    /// Fills in the tolerance schedule and validates the result.
    pub fn finish(mut self) -> Result<Self> {
        self.pipeline.epsilon_schedule = match &self.epsilon_list {
            Some(list) => list.clone(),
            None => linear_schedule(
                self.epsilon_start,
                self.epsilon_end,
                self.pipeline.outer_iters,
            ),
        };
        if self.epsilon_list.is_some() {
            self.pipeline.outer_iters = self.pipeline.epsilon_schedule.len();
        }
        self.pipeline.validate()?;
        let k = &self.knn;
        if k.k_min < 4 || k.k0 < k.k_min || k.shrink == 0 || !(k.ratio > 0.0) {
            return Err(Error::Config(format!(
                "need 4 <= knn_min <= knn_k0, knn_shrink > 0 and knn_ratio > 0, got {k:?}"
            )));
        }
        if self.pipeline.init == InitMode::Provided && self.init_map.is_none() {
            return Err(Error::Config("init = provided needs init_map".into()));
        }
        Ok(self)
    }

    fn value(&self, key: &str) -> String {
        let p = &self.pipeline;
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        match key {
            "outer_iters" => p.outer_iters.to_string(),
            "epsilon_start" => self.epsilon_start.to_string(),
            "epsilon_end" => self.epsilon_end.to_string(),
            "epsilon_schedule" => self.epsilon_list.as_deref().map(list).unwrap_or_default(),
            "distortion_ring" => p.distortion_ring.to_string(),
            "sparsity_ring" => p.sparsity_ring.to_string(),
            "mu" => p.mu.to_string(),
            "step0" => p.step0.to_string(),
            "inner_iters" => p.inner_iters.to_string(),
            "tol" => p.tol.to_string(),
            "postprocess" => p.postprocess.name().into(),
            "init" => p.init.name().into(),
            "init_map" => self
                .init_map
                .as_ref()
                .map(|x| x.display().to_string())
                .unwrap_or_default(),
            "seed" => p.seed.to_string(),
            "shot_radius_factor" => p.shot_radius_factor.to_string(),
            "hks_eigs" => p.hks_eigs.to_string(),
            "hks_time" => p.hks_time.to_string(),
            "signature_anchors" => p.signature_anchors.to_string(),
            "knn_k0" => self.knn.k0.to_string(),
            "knn_ratio" => self.knn.ratio.to_string(),
            "knn_shrink" => self.knn.shrink.to_string(),
            "knn_min" => self.knn.k_min.to_string(),
            "kind" => self.kind.name().into(),
            "threads" => self.threads.to_string(),
            "timing" => self.timing.to_string(),
            _ => unreachable!("every key has a value"),
        }
    }

    /// The configuration as a commented config file. Reading it back gives
    /// the same configuration.
    pub fn to_text(&self) -> String {
        let mut s = String::from("# sparse-qap run configuration\n");
        for &(key, help, method) in KEYS {
            let tag = if method { " [method default]" } else { "" };
            let _ = writeln!(s, "\n# {help}{tag}\n{key} = {}", self.value(key));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_method() {
        let c = RunConfig::default().finish().unwrap();
        assert_eq!(c.pipeline.epsilon_schedule, vec![5.0, 4.0, 3.0, 2.0, 1.0]);
        assert_eq!(
            (c.pipeline.distortion_ring, c.pipeline.sparsity_ring),
            (2, 4)
        );
        assert_eq!(c.pipeline.step0, 75.0);
        assert_eq!((c.knn.k0, c.knn.ratio, c.knn.shrink), (200, 0.05, 6));
        assert_eq!(c.pipeline.hks_eigs, 300);
    }

    #[test]
    fn text_roundtrip() {
        let mut c = RunConfig::default();
        c.set("seed", "7").unwrap();
        c.set("epsilon_schedule", "3, 2.5, 1").unwrap();
        c.set("kind", "cloud").unwrap();
        c.set("timing", "true").unwrap();
        let c = c.finish().unwrap();
        let mut back = RunConfig::default();
        back.apply_text(&c.to_text(), Path::new("cfg")).unwrap();
        assert_eq!(back.finish().unwrap(), c);
        let d = RunConfig::default().finish().unwrap();
        let mut back = RunConfig::default();
        back.apply_text(&d.to_text(), Path::new("cfg")).unwrap();
        assert_eq!(back.finish().unwrap(), d);
    }

    #[test]
    fn bad_values_are_config_errors() {
        let mut c = RunConfig::default();
        assert!(matches!(c.set("nope", "1"), Err(Error::Config(_))));
        assert!(matches!(c.set("mu", "abc"), Err(Error::Config(_))));
        assert!(matches!(c.set("init", "magic"), Err(Error::Config(_))));
        c.set("epsilon_schedule", "1,2").unwrap();
        assert!(matches!(c.clone().finish(), Err(Error::Config(_))));
        let err = RunConfig::default()
            .apply_text("seed 3\n", Path::new("cfg"))
            .unwrap_err();
        assert!(matches!(err, Error::Config(m) if m.starts_with("cfg:1:")));
    }

    #[test]
    fn schedule_follows_outer_iters() {
        let mut c = RunConfig::default();
        c.set("outer_iters", "3").unwrap();
        assert_eq!(
            c.finish().unwrap().pipeline.epsilon_schedule,
            vec![5.0, 3.0, 1.0]
        );
    }
}
