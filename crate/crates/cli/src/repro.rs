//! Named figures and demonstrations, regenerated from fixed parameters.

use crate::output::{csv, json, RunManifest, Sink};
use crate::{Failure, Outcome};
use clap::ValueEnum;
use hydrodetect::counterx::{build_family, verify_family};
use hydrodetect::flow::{forward_grid, ForwardModel};
use hydrodetect::inverse::{detect_c147, detect_quarter_symmetric, DetectionResult};
use hydrodetect::rigid::equivalent;
use hydrodetect::shape::{make_c147, make_ellipse};
use hydrodetect::spectral::ClosedFormProvider;
use hydrodetect::track::{synthesize_timeseries, track, PathFn, PosePath, TrackOptions};
use hydrodetect::{angle_diff, cis, Complex64, Configuration, Exec, ShapeSpec};
use serde::Serialize;
use std::path::Path;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Artifact {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    #[value(name = "prop64-demo")]
    Prop64Demo,
    #[value(name = "sec63-demo")]
    Sec63Demo,
    #[value(name = "thm14-demo")]
    Thm14Demo,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn run(artifact: Artifact, dir: &Path) -> Outcome {
    match artifact {
        Artifact::Fig1 => counterexample(2, 1.0, 0.5, 2.0, 512, dir, "repro fig1"),
        Artifact::Fig2 => counterexample(2, 1.0, 1.0, 4.0, 512, dir, "repro fig2"),
        Artifact::Fig3 => counterexample(6, 0.7, 0.9, -2.5, 512, dir, "repro fig3"),
        Artifact::Fig4 => fig4(dir),
        Artifact::Prop64Demo => quarter_demo(dir),
        Artifact::Sec63Demo => c147_demo(dir),
        Artifact::Thm14Demo => tracking_demo(dir),
    }
}

/// Writes `member_k.csv` boundaries and `report.json`.
pub fn counterexample(n: u32, omega: f64, rho: f64, level: f64, resolution: usize, dir: &Path, name: &str) -> Outcome {
    let family = build_family(n, omega, rho, level, resolution)?;
    let report = verify_family(&family);
    let mut m = RunManifest::new(name);
    m.param("n", n)
        .param("omega", omega)
        .param("rho", rho)
        .param("level", level)
        .param("resolution", resolution);
    let mut sink = Sink::new(m);
    for member in &family {
        let rows = member.boundary.iter().map(|p| vec![p.re, p.im]);
        sink.emit(
            Some(&dir.join(format!("member_{}.csv", member.member + 1))),
            csv(&["x", "y"], rows),
        );
    }
    #[derive(Serialize)]
    struct Summary<'a> {
        convention: hydrodetect::counterx::LevelConvention,
        effective_level: f64,
        centres: Vec<Complex64>,
        max_residual: f64,
        report: &'a hydrodetect::counterx::FamilyReport,
    }
    let summary = Summary {
        convention: family[0].convention,
        effective_level: family[0].effective_level,
        centres: family.iter().map(|f| f.s).collect(),
        max_residual: report.max_residual(),
        report: &report,
    };
    sink.emit(Some(&dir.join("report.json")), json(&summary));
    sink.finish()
}

fn fig4(dir: &Path) -> Outcome {
    let (a, b) = (2.0, 1.0);
    let shape = make_ellipse(a, b)?;
    let cfg = Configuration::new(0.0, c(0.0, 0.0), -2.0, cis(std::f64::consts::FRAC_PI_3));
    let model = ForwardModel::new(&shape, &cfg);
    let xs: Vec<f64> = (0..161).map(|i| -4.0 + 0.05 * i as f64).collect();
    let ys: Vec<f64> = (0..121).map(|j| -3.0 + 0.05 * j as f64).collect();
    let rows = forward_grid(&model, &xs, &ys, Exec::default())
        .into_iter()
        .map(|(x, y, v)| {
            let xi = v.map_or(c(f64::NAN, f64::NAN), |(xi, _)| xi);
            vec![x, y, xi.re, xi.im]
        });
    let root = (shape.coeff(-1) / shape.c1()).sqrt();
    let branch = [shape.f(root), shape.f(-root)];
    #[derive(Serialize)]
    struct Branch {
        branch_points: [Complex64; 2],
        distance: f64,
    }
    let mut m = RunManifest::new("repro fig4");
    m.param("a", a).param("b", b).param("configuration", hydrodetect::io::ConfigFile::from(&cfg));
    let mut sink = Sink::new(m);
    sink.emit(Some(&dir.join("xi0_grid.csv")), csv(&["x", "y", "re_xi", "im_xi"], rows));
    sink.emit(
        Some(&dir.join("branch_points.json")),
        json(&Branch {
            branch_points: branch,
            distance: branch[0].norm(),
        }),
    );
    sink.finish()
}

#[derive(Serialize)]
struct Trial {
    label: String,
    truth: Configuration,
    result: DetectionResult,
    recovered: bool,
}

fn trial(label: &str, truth: Configuration, result: DetectionResult, m: u32) -> Result<Trial, Failure> {
    let recovered = result.partial || {
        let mut any = false;
        for cfg in &result.configurations {
            any |= equivalent(cfg, &truth, m)?;
        }
        any
    };
    Ok(Trial {
        label: label.into(),
        truth,
        result,
        recovered,
    })
}

fn quarter_demo(dir: &Path) -> Outcome {
    let shape = ShapeSpec::new(c(1.0, 0.0), vec![c(0.0, 0.0), c(0.0, 0.0), c(0.2, 0.0)])?;
    let nu = c(0.0, 0.0);
    let cases = [
        ("moving", Configuration::new(0.7, c(0.4, -0.3), 1.3, c(0.8, 0.5))),
        ("rotating in place", Configuration::new(2.1, c(-0.6, 0.2), -0.9, c(0.0, 0.0))),
    ];
    let mut trials = Vec::new();
    for (label, truth) in cases {
        let provider = ClosedFormProvider::new(&shape, &truth, 8)?;
        let result = detect_quarter_symmetric(&shape, &provider, nu)?;
        let w_err = (result.configurations[0].w_world() - truth.w_world()).norm();
        let r_err = (result.configurations[0].r() - truth.r()).norm();
        let omega_err = (result.configurations[0].omega().abs() - truth.omega().abs()).abs();
        let mut t = trial(label, truth, result, 4)?;
        t.recovered = r_err < 1e-8 && w_err < 1e-8 && omega_err < 1e-8;
        trials.push(t);
    }
    let mut m = RunManifest::new("repro prop64-demo");
    m.param("shape", hydrodetect::io::ShapeFile::from(&shape));
    let mut sink = Sink::new(m);
    sink.emit(Some(&dir.join("quarter_demo.json")), json(&trials));
    sink.finish()
}

fn c147_demo(dir: &Path) -> Outcome {
    let shape = make_c147(c(1.0, 0.0), c(0.1, 0.05), c(0.03, -0.02))?;
    let nu = c(0.2, -0.1);
    let cases = [
        ("generic", Configuration::new(0.9, c(0.3, 0.5), 1.1, c(-0.4, 0.7))),
        ("translation", Configuration::new(4.0, c(-0.8, 0.1), 0.0, c(0.6, -0.2))),
        ("rotation", Configuration::new(1.7, c(0.5, -0.5), -1.4, c(0.0, 0.0))),
    ];
    let mut trials = Vec::new();
    for (label, truth) in cases {
        let provider = ClosedFormProvider::new(&shape, &truth, 12)?;
        let result = detect_c147(&shape, &provider, nu)?;
        trials.push(trial(label, truth, result, 1)?);
    }
    let mut m = RunManifest::new("repro sec63-demo");
    m.param("shape", hydrodetect::io::ShapeFile::from(&shape)).param("nu", nu);
    let mut sink = Sink::new(m);
    sink.emit(Some(&dir.join("c147_demo.json")), json(&trials));
    sink.finish()
}

fn tracking_demo(dir: &Path) -> Outcome {
    let shape = make_c147(c(1.0, 0.0), c(0.1, 0.05), c(0.03, -0.02))?;
    let nu = c(0.0, 0.0);
    let path = PathFn {
        pose: |t: f64| (0.5 * cis(t), 0.3 * t),
        rate: |t: f64| (0.5 * c(0.0, 1.0) * cis(t), 0.3),
    };
    let times: Vec<f64> = (0..200).map(|i| i as f64 / 199.0).collect();
    let data = synthesize_timeseries(&shape, &path, nu, 12, &times)?;
    let opts = TrackOptions { step: 1e-3, until: None };
    let tr = track(&shape, path.pose(0.0), &data, &opts)?;
    let mut max_r: f64 = 0.0;
    let mut max_alpha: f64 = 0.0;
    let rows: Vec<Vec<f64>> = tr
        .times
        .iter()
        .zip(&tr.poses)
        .map(|(&t, p)| {
            let truth = path.pose(t);
            let er = (p.r - truth.r).norm();
            let ea = angle_diff(p.alpha, truth.alpha).abs();
            max_r = max_r.max(er);
            max_alpha = max_alpha.max(ea);
            vec![t, p.r.re, p.r.im, p.alpha, truth.r.re, truth.r.im, truth.alpha, er, ea]
        })
        .collect();
    #[derive(Serialize)]
    struct Errors {
        samples: usize,
        step: f64,
        max_position_error: f64,
        max_angle_error: f64,
    }
    let mut m = RunManifest::new("repro thm14-demo");
    m.param("shape", hydrodetect::io::ShapeFile::from(&shape))
        .param("samples", times.len())
        .param("step", opts.step);
    let mut sink = Sink::new(m);
    sink.emit(
        Some(&dir.join("trajectory.csv")),
        csv(
            &["t", "re_r", "im_r", "alpha", "re_r_true", "im_r_true", "alpha_true", "err_r", "err_alpha"],
            rows,
        ),
    );
    sink.emit(
        Some(&dir.join("errors.json")),
        json(&Errors {
            samples: times.len(),
            step: opts.step,
            max_position_error: max_r,
            max_angle_error: max_alpha,
        }),
    );
    sink.finish()
}
