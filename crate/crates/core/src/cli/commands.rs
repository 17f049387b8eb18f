use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use nalgebra::{Isometry3, Translation3, Unit, UnitQuaternion, Vector3};

use super::config::InputKind;
use super::{with_threads, DescriptorArgs, EvalArgs, MatchArgs, PlotArgs, SynthArgs};
use crate::anchor::{
    csv_err, farthest_subset, outer_log_csv, run_pipeline, Correspondence, InitMode, OuterRecord,
    Surface,
};
use crate::descriptors::{geodesic_signature, shot_like_descriptor, LaplaceSpectrum, ShotParams};
use crate::error::{Error, Result};
use crate::eval::{
    cdf_csv, default_thresholds, distortion_report, geodesic_error, line_plot, reference_diameter,
    synth_cloud_pair, synth_pair, DistortionReport, ErrorReport, GroundTruth, Perturbation, Series,
    SynthSpec,
};
use crate::geometry::io::{fmt_f64, load_cloud, load_mesh, write_off, write_text, write_xyz};
use crate::pointcloud::AdaptiveKnnParams;
use crate::qap::IterRecord;

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn check_exists(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::NotFound(path.to_path_buf()))
    }
}

fn load_surface(path: &Path, kind: InputKind, knn: &AdaptiveKnnParams) -> Result<Surface> {
    check_exists(path)?;
    match kind.resolve(path) {
        InputKind::Cloud => Surface::from_cloud(&load_cloud(path)?, knn),
        _ => Ok(Surface::from_mesh(load_mesh(path, None)?)),
    }
}

/// `outer,iter,objective,step,residual` for every inner solver iteration.
fn solver_log_csv(logs: &[Vec<IterRecord>]) -> String {
    let mut s = String::from("outer,iter,objective,step,residual\n");
    for (k, log) in logs.iter().enumerate() {
        for r in log {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                k + 1,
                r.iter,
                fmt_f64(r.objective),
                fmt_f64(r.step),
                fmt_f64(r.residual)
            );
        }
    }
    s
}

pub fn run_match(a: MatchArgs) -> Result<()> {
    let cfg = a.cfg.resolve()?;
    if a.print_config {
        print!("{}", cfg.to_text());
        return Ok(());
    }
    let (source, target) = (
        a.source.expect("required by clap"),
        a.target.expect("required by clap"),
    );
    with_threads(cfg.threads, || {
        let src = load_surface(&source, cfg.kind, &cfg.knn)?;
        let dst = load_surface(&target, cfg.kind, &cfg.knn)?;
        info!(
            "source {} vertices, target {} vertices",
            src.n_vertices(),
            dst.n_vertices()
        );
        let phi0 = match (&cfg.init_map, cfg.pipeline.init) {
            (Some(p), InitMode::Provided) => {
                check_exists(p)?;
                Some(Correspondence::read_csv(
                    p,
                    Some(src.n_vertices()),
                    Some(dst.n_vertices()),
                )?)
            }
            _ => None,
        };
        let out = run_pipeline(&src, &dst, &cfg.pipeline, phi0.as_ref())?;
        ensure_dir(&a.out)?;
        out.map.write_csv(a.out.join("map.csv"))?;
        out.anchors.write_csv(a.out.join("anchors.csv"))?;
        let log: Vec<OuterRecord> = out
            .log
            .iter()
            .map(|r| OuterRecord {
                seconds: if cfg.timing { r.seconds } else { 0.0 },
                ..*r
            })
            .collect();
        write_text(a.out.join("log.csv"), &outer_log_csv(&log))?;
        write_text(
            a.out.join("solver_log.csv"),
            &solver_log_csv(&out.solver_logs),
        )?;
        write_text(a.out.join("config.txt"), &cfg.to_text())?;
        Ok(())
    })
}

fn labels_for(paths: &[PathBuf], given: &[String]) -> Result<Vec<String>> {
    if !given.is_empty() {
        if given.len() != paths.len() {
            return Err(Error::Config(format!(
                "{} labels for {} maps",
                given.len(),
                paths.len()
            )));
        }
        return Ok(given.to_vec());
    }
    let mut out: Vec<String> = Vec::new();
    for (k, p) in paths.iter().enumerate() {
        let stem = p
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("map")
            .to_string();
        out.push(if out.contains(&stem) {
            format!("{stem}_{}", k + 1)
        } else {
            stem
        });
    }
    Ok(out)
}

fn check_label(l: &str) -> Result<()> {
    if l.is_empty() || l.contains([',', '"', '\n']) {
        return Err(Error::Config(format!(
            "label {l:?} must be non-empty without commas or quotes"
        )));
    }
    Ok(())
}

pub fn run_eval(a: EvalArgs) -> Result<()> {
    let cfg = a.cfg.resolve()?;
    let labels = labels_for(&a.maps, &a.labels)?;
    labels.iter().try_for_each(|l| check_label(l))?;
    with_threads(cfg.threads, || {
        let dst = load_surface(&a.target, cfg.kind, &cfg.knn)?;
        let src = a
            .source
            .as_ref()
            .map(|p| load_surface(p, cfg.kind, &cfg.knn))
            .transpose()?;
        let n2 = dst.n_vertices();
        check_exists(&a.gt)?;
        let gt = GroundTruth::read_csv(&a.gt, src.as_ref().map(|s| s.n_vertices()), Some(n2))?;
        let n1 = gt.map.n1();
        let diam = reference_diameter(dst.graph());
        let thresholds = default_thresholds();
        let mut reports: Vec<ErrorReport> = Vec::new();
        for p in &a.maps {
            check_exists(p)?;
            let phi = Correspondence::read_csv(p, Some(n1), Some(n2))?;
            let mut r =
                ErrorReport::new(geodesic_error(&phi, &gt, dst.graph(), diam)?, &thresholds);
            if let Some(src) = &src {
                r.distortion = Some(distortion_report(
                    &phi,
                    src,
                    &dst,
                    cfg.pipeline.distortion_ring,
                )?);
            }
            reports.push(r);
        }
        ensure_dir(&a.out)?;

        let mut s = String::from("source_index");
        for l in &labels {
            let _ = write!(s, ",{l}");
        }
        if src.is_some() {
            for l in &labels {
                let _ = write!(s, ",distortion_{l}");
            }
        }
        s.push('\n');
        for i in 0..n1 {
            let _ = write!(s, "{i}");
            for r in &reports {
                s.push(',');
                if let Some(e) = r.per_vertex_error[i] {
                    s.push_str(&fmt_f64(e));
                }
            }
            for d in reports.iter().filter_map(|r| r.distortion.as_ref()) {
                let _ = write!(s, ",{}", fmt_f64(d.values[i]));
            }
            s.push('\n');
        }
        write_text(a.out.join("errors.csv"), &s)?;

        let curves: Vec<(&str, &[(f64, f64)])> = labels
            .iter()
            .zip(&reports)
            .map(|(l, r)| (l.as_str(), r.cdf.as_slice()))
            .collect();
        write_text(a.out.join("cdf.csv"), &cdf_csv(&curves)?)?;
        let series: Vec<Series> = labels
            .iter()
            .zip(&reports)
            .map(|(l, r)| Series::new(l.clone(), r.cdf.clone()))
            .collect();
        write_text(
            a.out.join("cdf.svg"),
            &line_plot(
                &series,
                "Correspondence accuracy",
                "geodesic error",
                "fraction of vertices",
                false,
            ),
        )?;

        let mut sum = String::from("label,evaluated,unreachable,mean,median,mean_distortion\n");
        for (l, r) in labels.iter().zip(&reports) {
            let md = r
                .distortion
                .as_ref()
                .map(|d| fmt_f64(d.mean))
                .unwrap_or_default();
            let _ = writeln!(
                sum,
                "{l},{},{},{},{},{md}",
                r.evaluated,
                r.unreachable,
                fmt_f64(r.mean),
                fmt_f64(r.median)
            );
        }
        write_text(a.out.join("summary.csv"), &sum)?;

        if src.is_some() {
            let ds: Vec<&DistortionReport> = reports
                .iter()
                .filter_map(|r| r.distortion.as_ref())
                .collect();
            let curves: Vec<(&str, &[(f64, f64)])> = labels
                .iter()
                .zip(&ds)
                .map(|(l, d)| (l.as_str(), d.cdf.as_slice()))
                .collect();
            write_text(a.out.join("distortion_cdf.csv"), &cdf_csv(&curves)?)?;
            let series: Vec<Series> = labels
                .iter()
                .zip(&ds)
                .map(|(l, d)| Series::new(l.clone(), d.cdf.clone()))
                .collect();
            write_text(
                a.out.join("distortion_cdf.svg"),
                &line_plot(
                    &series,
                    "Local distortion",
                    "distortion",
                    "fraction of vertices",
                    false,
                ),
            )?;
        }
        Ok(())
    })
}

fn floats(what: &str, s: &str, n: usize) -> Result<Vec<f64>> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config(format!("{what}: cannot parse {s:?}")))?;
    if v.len() != n || v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Config(format!(
            "{what}: expected {n} finite comma-separated numbers, got {s:?}"
        )));
    }
    Ok(v)
}

fn motion(rotate: Option<&str>, translate: Option<&str>) -> Result<Isometry3<f64>> {
    let rot = match rotate {
        None => UnitQuaternion::identity(),
        Some(r) => {
            let v = floats("rotate", r, 4)?;
            let axis = Vector3::new(v[0], v[1], v[2]);
            if axis.norm() == 0.0 {
                return Err(Error::Config("rotate: axis must be nonzero".into()));
            }
            UnitQuaternion::from_axis_angle(&Unit::new_normalize(axis), v[3].to_radians())
        }
    };
    let t = match translate {
        None => Vector3::zeros(),
        Some(s) => {
            let v = floats("translate", s, 3)?;
            Vector3::new(v[0], v[1], v[2])
        }
    };
    Ok(Isometry3::from_parts(Translation3::from(t), rot))
}

fn crop_spec(tokens: &[String]) -> Result<Perturbation> {
    let (mut center, mut radius) = (None, None);
    for tok in tokens.iter().flat_map(|t| t.split(',')) {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("crop-ball: expected key=value, got {tok:?}")))?;
        match k.trim() {
            "center" => {
                center = Some(
                    v.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Config(format!("crop-ball: bad center {v:?}")))?,
                )
            }
            "radius" => {
                radius = Some(
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("crop-ball: bad radius {v:?}")))?,
                )
            }
            other => return Err(Error::Config(format!("crop-ball: unknown key {other:?}"))),
        }
    }
    match (center, radius) {
        (Some(center), Some(radius)) => Ok(Perturbation::CropBall { center, radius }),
        _ => Err(Error::Config(
            "crop-ball needs center=<vertex> and radius=<fraction>".into(),
        )),
    }
}

pub fn run_synth(a: SynthArgs) -> Result<()> {
    let kind = InputKind::parse(&a.kind).ok_or_else(|| {
        Error::Config(format!(
            "kind: expected auto, mesh or cloud, got {:?}",
            a.kind
        ))
    })?;
    let perturbation = match (a.delete_faces, &a.crop_ball, a.noise) {
        (Some(percent), _, _) => Perturbation::DeleteFaces { percent },
        (_, Some(tokens), _) => crop_spec(tokens)?,
        (_, _, Some(sigma)) => Perturbation::Noise { sigma },
        _ => Perturbation::None,
    };
    let spec = SynthSpec {
        motion: motion(a.rotate.as_deref(), a.translate.as_deref())?,
        permutation_seed: a.permute,
        perturbation,
        seed: a.seed,
    };
    check_exists(&a.input)?;
    let gt = match kind.resolve(&a.input) {
        InputKind::Cloud => {
            let (cloud, gt) = synth_cloud_pair(&load_cloud(&a.input)?, &spec)?;
            ensure_dir(&a.out)?;
            write_xyz(a.out.join("target.xyz"), &cloud)?;
            gt
        }
        _ => {
            let (mesh, gt) = synth_pair(&load_mesh(&a.input, None)?, &spec)?;
            ensure_dir(&a.out)?;
            write_off(a.out.join("target.off"), &mesh)?;
            gt
        }
    };
    gt.write_csv(a.out.join("gt.csv"))
}

pub fn run_descriptors(a: DescriptorArgs) -> Result<()> {
    let cfg = a.cfg.resolve()?;
    let which = a.which.as_str();
    if !matches!(
        which,
        "stiffness" | "mass" | "shot" | "hks" | "geodesic_sig"
    ) {
        return Err(Error::Config(format!(
            "which: expected stiffness, mass, shot, hks or geodesic_sig, got {which:?}"
        )));
    }
    with_threads(cfg.threads, || {
        let surf = load_surface(&a.input, cfg.kind, &cfg.knn)?;
        ensure_dir(&a.out)?;
        match which {
            "stiffness" => write_text(
                a.out.join("stiffness.mtx"),
                &surf.stiffness().to_matrix_market(),
            ),
            "mass" => write_text(a.out.join("mass.mtx"), &surf.mass().to_matrix_market()),
            "shot" => {
                let params = ShotParams::with_radius(
                    cfg.pipeline.shot_radius_factor * surf.mean_edge_length(),
                );
                shot_like_descriptor(surf.points(), &params)?.write_csv(a.out.join("shot.csv"))
            }
            "hks" => {
                if surf.mesh().is_none() {
                    return Err(Error::HksUnsupported("input is a point cloud".into()));
                }
                let spec = LaplaceSpectrum::of_operators(
                    surf.stiffness(),
                    surf.mass(),
                    cfg.pipeline.hks_eigs.min(surf.n_vertices()),
                )?;
                spec.hks(&[cfg.pipeline.hks_time])?
                    .write_csv(a.out.join("hks.csv"))
            }
            _ => {
                let n = surf.n_vertices();
                let anchors: Vec<usize> = match &a.anchors {
                    Some(list) => list
                        .split(',')
                        .map(|t| {
                            t.trim()
                                .parse::<usize>()
                                .map_err(|_| Error::Config(format!("anchors: cannot parse {t:?}")))
                        })
                        .collect::<Result<_>>()?,
                    None => {
                        let all: Vec<usize> = (0..n).collect();
                        farthest_subset(surf.graph(), &all, cfg.pipeline.signature_anchors.min(n))
                    }
                };
                let sig = geodesic_signature(surf.graph(), &anchors)?;
                sig.write_csv(a.out.join("geodesic_sig.csv"))?;
                let mut s = String::from("column,vertex\n");
                for (k, v) in anchors.iter().enumerate() {
                    let _ = writeln!(s, "{k},{v}");
                }
                write_text(a.out.join("geodesic_sig_anchors.csv"), &s)
            }
        }
    })
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_table(path: &Path) -> Result<Table> {
    check_exists(path)?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(String::from)
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        rows.push(
            rec.map_err(|e| csv_err(path, e))?
                .iter()
                .map(String::from)
                .collect(),
        );
    }
    Ok(Table { header, rows })
}

fn column(t: &Table, name: &str, path: &Path) -> Result<usize> {
    t.header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::Config(format!("{} has no column {name:?}", path.display())))
}

pub fn run_plot(a: PlotArgs) -> Result<()> {
    let mut series = Vec::new();
    let multi = a.inputs.len() > 1;
    let mut x_name = String::new();
    for path in &a.inputs {
        let t = read_table(path)?;
        if t.header.len() < 2 {
            return Err(Error::Config(format!(
                "{} needs at least two columns",
                path.display()
            )));
        }
        let xc = match &a.x {
            Some(x) => column(&t, x, path)?,
            None => 0,
        };
        x_name = t.header[xc].clone();
        let ycols: Vec<usize> = if a.y.is_empty() {
            (0..t.header.len()).filter(|&c| c != xc).collect()
        } else {
            a.y.iter()
                .map(|y| column(&t, y, path))
                .collect::<Result<_>>()?
        };
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
        for yc in ycols {
            let points: Vec<(f64, f64)> = t
                .rows
                .iter()
                .filter_map(|r| {
                    Some((
                        r.get(xc)?.parse::<f64>().ok()?,
                        r.get(yc)?.parse::<f64>().ok()?,
                    ))
                })
                .collect();
            let label = if multi {
                format!("{stem}:{}", t.header[yc])
            } else {
                t.header[yc].clone()
            };
            series.push(Series::new(label, points));
        }
    }
    let title = a.title.clone().unwrap_or_else(|| {
        a.inputs
            .iter()
            .filter_map(|p| p.file_name().and_then(|s| s.to_str()))
            .collect::<Vec<_>>()
            .join(", ")
    });
    let y_label = if a.log_y { "value (log10)" } else { "value" };
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    write_text(
        &a.out,
        &line_plot(&series, &title, &x_name, y_label, a.log_y),
    )
}
