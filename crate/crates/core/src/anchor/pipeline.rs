use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use log::info;

use super::correspondence::{AnchorSet, Correspondence};
use super::distortion::local_distortion;
use super::init::{random_init, shot_like_init};
use super::postprocess::{postprocess, PostprocessMode, PostprocessParams};
use super::select::{build_pattern, select_anchors};
use super::surface::Surface;
use crate::error::{Error, Result};
use crate::geometry::io::{fmt_f64, write_text};
use crate::qap::{
    extract_map, solve, IterRecord, Projector, QapProblem, SolverParams, TransportPlan,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    ShotLike,
    Random,
    Provided,
}

impl InitMode {
    pub fn name(self) -> &'static str {
        match self {
            InitMode::ShotLike => "shot_like",
            InitMode::Random => "random",
            InitMode::Provided => "provided",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "shot_like" => Some(InitMode::ShotLike),
            "random" => Some(InitMode::Random),
            "provided" => Some(InitMode::Provided),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub outer_iters: usize,
    /// One tolerance per outer iteration, strictly decreasing.
    pub epsilon_schedule: Vec<f64>,
    pub distortion_ring: usize,
    pub sparsity_ring: usize,
    pub mu: f64,
    pub step0: f64,
    pub inner_iters: usize,
    pub tol: f64,
    pub postprocess: PostprocessMode,
    pub init: InitMode,
    pub seed: u64,
    /// Descriptor radius for shot-like init, in mean edge lengths.
    pub shot_radius_factor: f64,
    pub hks_eigs: usize,
    pub hks_time: f64,
    pub signature_anchors: usize,
}

/// `k` values evenly spaced from `first` to `last`.
pub fn linear_schedule(first: f64, last: f64, k: usize) -> Vec<f64> {
    match k {
        0 => Vec::new(),
        1 => vec![last],
        _ => (0..k)
            .map(|i| first + (last - first) * i as f64 / (k - 1) as f64)
            .collect(),
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            outer_iters: 5,
            epsilon_schedule: linear_schedule(5.0, 1.0, 5),
            distortion_ring: 2,
            sparsity_ring: 4,
            mu: 1.0,
            step0: 75.0,
            inner_iters: 30,
            tol: 1e-4,
            postprocess: PostprocessMode::GeodesicSig,
            init: InitMode::ShotLike,
            seed: 0,
            shot_radius_factor: 3.0,
            hks_eigs: 300,
            hks_time: 50.0,
            signature_anchors: 100,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.outer_iters == 0 {
            return bad("outer_iters must be at least 1".into());
        }
        if self.epsilon_schedule.len() != self.outer_iters {
            return bad(format!(
                "epsilon schedule has {} values for {} outer iterations",
                self.epsilon_schedule.len(),
                self.outer_iters
            ));
        }
        if self.epsilon_schedule.iter().any(|e| !(*e > 0.0)) {
            return bad("epsilon values must be positive".into());
        }
        if self.epsilon_schedule.windows(2).any(|w| !(w[1] < w[0])) {
            return bad("epsilon schedule must be strictly decreasing".into());
        }
        if self.distortion_ring == 0 || self.distortion_ring >= self.sparsity_ring {
            return bad(format!(
                "need 0 < distortion_ring < sparsity_ring, got {} and {}",
                self.distortion_ring, self.sparsity_ring
            ));
        }
        if !(self.mu >= 0.0) || !(self.step0 > 0.0) || !(self.tol >= 0.0) {
            return bad("mu and tol must be nonnegative, step0 positive".into());
        }
        if self.inner_iters == 0 || self.signature_anchors == 0 || self.hks_eigs == 0 {
            return bad("inner_iters, signature_anchors and hks_eigs must be positive".into());
        }
        if !(self.shot_radius_factor > 0.0) || !(self.hks_time > 0.0) {
            return bad("shot_radius_factor and hks_time must be positive".into());
        }
        Ok(())
    }

    pub fn solver_params(&self) -> SolverParams {
        SolverParams {
            step0: self.step0,
            max_iters: self.inner_iters,
            tol: self.tol,
        }
    }

    pub fn postprocess_params(&self) -> PostprocessParams {
        PostprocessParams {
            mode: self.postprocess,
            signature_anchors: self.signature_anchors,
            hks_eigs: self.hks_eigs,
            hks_time: self.hks_time,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterRecord {
    pub iter: usize,
    pub epsilon: f64,
    pub num_anchors: usize,
    pub objective: f64,
    pub seconds: f64,
}

/// CSV with header `iter,epsilon,num_anchors,objective,seconds`.
pub fn outer_log_csv(log: &[OuterRecord]) -> String {
    let mut s = String::from("iter,epsilon,num_anchors,objective,seconds\n");
    for r in log {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            r.iter,
            fmt_f64(r.epsilon),
            r.num_anchors,
            fmt_f64(r.objective),
            fmt_f64(r.seconds)
        ));
    }
    s
}

pub fn write_outer_log(path: impl AsRef<Path>, log: &[OuterRecord]) -> Result<()> {
    write_text(path, &outer_log_csv(log))
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    /// Completed map after post-processing.
    pub map: Correspondence,
    /// Map at the end of the last outer iteration, before post-processing.
    pub raw_map: Correspondence,
    /// Anchors of the final map at the last tolerance.
    pub anchors: AnchorSet,
    pub log: Vec<OuterRecord>,
    /// Inner solver log of every outer iteration.
    pub solver_logs: Vec<Vec<IterRecord>>,
}

/// Alternates anchor selection and sparse relaxed-QAP solves under the
/// tolerance schedule, then completes the map from the final anchors.
///
/// Sources outside every anchor neighborhood keep their previous target in
/// a round. `phi0` is required when `config.init` is `Provided` and ignored
/// otherwise.
pub fn run_pipeline(
    src: &Surface,
    dst: &Surface,
    config: &PipelineConfig,
    phi0: Option<&Correspondence>,
) -> Result<PipelineOutput> {
    config.validate()?;
    let (n1, n2) = (src.n_vertices(), dst.n_vertices());
    let start = Instant::now();
    let mut phi = match config.init {
        InitMode::Provided => {
            let p =
                phi0.ok_or_else(|| Error::Config("init = provided needs an initial map".into()))?;
            if p.n1() != n1 || p.n2() != n2 {
                return Err(Error::DimensionMismatch(format!(
                    "initial map is {}->{}, surfaces have {n1} and {n2} vertices",
                    p.n1(),
                    p.n2()
                )));
            }
            p.clone()
        }
        InitMode::Random => random_init(n1, n2, config.seed),
        InitMode::ShotLike => shot_like_init(src, dst, config.shot_radius_factor, config.seed)?,
    };
    let weights = src.mass().diagonal();
    let prob = QapProblem::new(
        src.stiffness(),
        dst.stiffness(),
        src.mass(),
        dst.mass(),
        config.mu,
    )?;
    let params = config.solver_params();
    let mut log = Vec::new();
    let mut solver_logs = Vec::new();

    for (k, &eps) in config.epsilon_schedule.iter().enumerate() {
        let t0 = Instant::now();
        let dist = local_distortion(
            &phi,
            src.graph(),
            dst.graph(),
            &weights,
            config.distortion_ring,
        )?;
        let anchors = select_anchors(&dist, &phi, eps)?;
        if anchors.is_empty() {
            return Err(Error::EmptyAnchorSet {
                iter: k + 1,
                epsilon: eps,
            });
        }
        let pattern = Arc::new(build_pattern(
            &anchors,
            src.graph(),
            dst.graph(),
            config.sparsity_ring,
        )?);
        let projector = Projector::new(&pattern);
        let d0 = projector.project(&TransportPlan::one_hot(pattern.clone(), &phi))?;
        let out = solve(&prob, &projector, d0, &params)?;
        let next = extract_map(&out.plan);
        for s in pattern.active_rows() {
            phi.set(s, next.get(s));
        }
        let rec = OuterRecord {
            iter: k + 1,
            epsilon: eps,
            num_anchors: anchors.len(),
            objective: out.objective,
            seconds: t0.elapsed().as_secs_f64(),
        };
        info!(
            "outer {}: eps {eps}, {} anchors, {} admissible entries, objective {:e}, {:.2} s",
            rec.iter,
            rec.num_anchors,
            pattern.nnz(),
            rec.objective,
            rec.seconds
        );
        log.push(rec);
        solver_logs.push(out.log);
    }

    let eps_last = *config.epsilon_schedule.last().unwrap();
    let dist = local_distortion(
        &phi,
        src.graph(),
        dst.graph(),
        &weights,
        config.distortion_ring,
    )?;
    let anchors = select_anchors(&dist, &phi, eps_last)?;
    if anchors.is_empty() {
        return Err(Error::EmptyAnchorSet {
            iter: config.outer_iters + 1,
            epsilon: eps_last,
        });
    }
    let map = postprocess(&anchors, src, dst, &config.postprocess_params())?;
    info!(
        "pipeline done: {} final anchors, {:.2} s total",
        anchors.len(),
        start.elapsed().as_secs_f64()
    );
    Ok(PipelineOutput {
        map,
        raw_map: phi,
        anchors,
        log,
        solver_logs,
    })
}
