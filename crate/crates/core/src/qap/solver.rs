use std::collections::VecDeque;
use std::path::Path;

use log::debug;

use super::objective::QapProblem;
use super::plan::TransportPlan;
use super::project::Projector;
use crate::error::{Error, Result};
use crate::geometry::io::{fmt_f64, write_text};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    /// First step length; later steps are Barzilai-Borwein, clamped to
    /// `[1e-6, 1e3] * step0`.
    pub step0: f64,
    pub max_iters: usize,
    /// Stop once `|f_k - f_{k+1}| / f_k` falls below this.
    pub tol: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            step0: 75.0,
            max_iters: 30,
            tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterRecord {
    pub iter: usize,
    pub objective: f64,
    pub step: f64,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    /// Iterate with the lowest objective seen.
    pub plan: TransportPlan,
    pub objective: f64,
    pub log: Vec<IterRecord>,
}

/// CSV with header `iter,objective,step,residual`.
pub fn iteration_log_csv(log: &[IterRecord]) -> String {
    let mut s = String::from("iter,objective,step,residual\n");
    for r in log {
        s.push_str(&format!(
            "{},{},{},{}\n",
            r.iter,
            fmt_f64(r.objective),
            fmt_f64(r.step),
            fmt_f64(r.residual)
        ));
    }
    s
}

pub fn write_iteration_log(path: impl AsRef<Path>, log: &[IterRecord]) -> Result<()> {
    write_text(path, &iteration_log_csv(log))
}

/// Objectives a full step is compared against.
const NONMONOTONE_WINDOW: usize = 10;
/// Sufficient-decrease fraction of the directional derivative.
const ARMIJO: f64 = 1e-4;

/// Projected gradient descent with Barzilai-Borwein steps from a feasible
/// `d0`.
///
/// The BB step proposes a trial point `P(D - alpha * grad)`. It is taken
/// whole when its objective stays below the largest of the last few
/// objectives (a non-monotone Armijo test). Otherwise, since the objective
/// is quadratic, the exact minimizer on the segment from `D` to the trial
/// point is taken, so a step too long for the operators' scale shortens
/// instead of blowing up. The logged step is the effective one,
/// `alpha * lambda`.
pub fn solve(
    prob: &QapProblem,
    projector: &Projector,
    d0: TransportPlan,
    params: &SolverParams,
) -> Result<SolveOutcome> {
    if !(params.step0 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "step0 must be positive, got {}",
            params.step0
        )));
    }
    let (lo, hi) = (1e-6 * params.step0, 1e3 * params.step0);
    let (mut f, mut g) = prob.objective_and_gradient(&d0)?;
    if !f.is_finite() {
        return Err(Error::Divergence { iter: 0, step: 0.0 });
    }
    let mut log = vec![IterRecord {
        iter: 0,
        objective: f,
        step: 0.0,
        residual: projector.marginal_residual(&d0),
    }];
    let mut d = d0;
    let mut best = (d.clone(), f);
    if f == 0.0 {
        return Ok(SolveOutcome {
            plan: best.0,
            objective: 0.0,
            log,
        });
    }
    let mut alpha = params.step0;
    let mut recent = VecDeque::from([f]);
    for iter in 1..=params.max_iters {
        let mut y = d.clone();
        for (v, gv) in y.values_mut().iter_mut().zip(g.values()) {
            *v -= alpha * gv;
        }
        let trial = projector.project(&y)?;
        let mut dir = trial;
        for (v, dv) in dir.values_mut().iter_mut().zip(d.values()) {
            *v -= dv;
        }
        let slope = g.dot(&dir);
        if !(slope < 0.0) {
            // no descent left along the projected gradient
            break;
        }
        // f(D + l*dir) = f + l*slope + l^2*curv, and Hess*dir comes with it
        let (curv, hdir) = prob.objective_and_gradient(&dir)?;
        let full = f + slope + curv;
        let reference = recent.iter().fold(f, |a: f64, &v| a.max(v));
        let lambda = if full <= reference + ARMIJO * slope || !(curv > 0.0) {
            1.0
        } else {
            (-slope / (2.0 * curv)).min(1.0)
        };
        let step = alpha * lambda;
        let f_next = f + lambda * slope + lambda * lambda * curv;
        if !f_next.is_finite() || !curv.is_finite() {
            return Err(Error::Divergence { iter, step });
        }
        let f_next = f_next.max(0.0);
        let (mut ss, mut sy) = (0.0, 0.0);
        for ((dv, gv), (pv, hv)) in d
            .values_mut()
            .iter_mut()
            .zip(g.values_mut())
            .zip(dir.values().iter().zip(hdir.values()))
        {
            let s = lambda * pv;
            let yv = lambda * hv;
            *dv += s;
            *gv += yv;
            ss += s * s;
            sy += s * yv;
        }
        let residual = projector.marginal_residual(&d);
        log.push(IterRecord {
            iter,
            objective: f_next,
            step,
            residual,
        });
        debug!("qap iter {iter}: f = {f_next:e}, step = {step:e}");

        alpha = if sy > 0.0 {
            (ss / sy).clamp(lo, hi)
        } else {
            params.step0
        };
        if recent.len() == NONMONOTONE_WINDOW {
            recent.pop_front();
        }
        recent.push_back(f_next);
        if f_next < best.1 {
            best = (d.clone(), f_next);
        }
        let rel = (f - f_next).abs() / f.max(f64::MIN_POSITIVE);
        f = f_next;
        if f == 0.0 || rel < params.tol || ss == 0.0 {
            break;
        }
    }
    Ok(SolveOutcome {
        plan: best.0,
        objective: best.1,
        log,
    })
}
