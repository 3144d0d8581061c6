use std::path::Path;

use serde::{Deserialize, Serialize};
use spacobi::admm::{fit, AdmmState, FitReport, FusionPenalty};
use spacobi::io::{format_float, read_matrix, render_heatmap, to_json_string, write_json, write_matrix};
use spacobi::metrics::{
    adjusted_rand_index, extract_clusters, product_labels, selection_auc, selection_rates, BiclusterResult,
};
use spacobi::par::map_range;
use spacobi::select::{
    ari_tune, grid_search, pilot_weights, prepare, stability_select, FitSettings, GridFit, GridMode, GridPoint,
    GridSpec, PointReport, DEFAULT_BOOTSTRAPS,
};
use spacobi::simgen::{generate_pair, SimSpec, Truth};
use spacobi::{DataMatrix, Execution, ProxKind, Standardizer};

use crate::args::{EvalArgs, FitArgs, HeatmapArgs, PathArgs, Selection, SimulateArgs, TuneArgs};
use crate::config::{
    self, default_gamma3_ladder, default_gamma_ladder, input_path, output_dir, pick, pick_opt, FileConfig,
    DEFAULT_GAMMA,
};
use crate::CliError;

pub const RESULT_FILE: &str = "result.json";
pub const A_HAT_FILE: &str = "A_hat.csv";
pub const HEATMAP_FILE: &str = "heatmap.pgm";
pub const STATE_FILE: &str = "state.json";
pub const GRID_REPORT_FILE: &str = "grid_report.json";
pub const PATH_CSV_FILE: &str = "fnr_fpr_path.csv";
pub const PATH_JSON_FILE: &str = "path.json";

/// Truth written next to each simulated matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSidecar {
    pub spec: SimSpec,
    pub replicate: usize,
    pub truth: Truth,
}

/// Agreement of a fitted biclustering with the simulation truth. Column
/// and product ARIs use the informative columns only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub row_ari: Option<f64>,
    pub col_ari: Option<f64>,
    pub product_ari: Option<f64>,
    pub fnr: f64,
    pub fpr: f64,
}

/// Contents of `result.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOutput {
    #[serde(flatten)]
    pub point: PointReport,
    pub q: ProxKind,
    #[serde(flatten)]
    pub clusters: BiclusterResult,
    pub n_row_clusters: usize,
    pub n_col_clusters: usize,
    pub n_selected: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub evaluation: Option<Evaluation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedPoint {
    pub index: usize,
    #[serde(flatten)]
    pub point: PointReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColdComparison {
    pub total_iterations: usize,
    pub iterations: Vec<usize>,
    /// Largest `‖Â_warm − Â_cold‖_F / max(1, ‖Â_cold‖_F)` over the grid.
    pub max_relative_difference: Option<f64>,
}

/// Contents of `grid_report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub selection: Selection,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bootstraps: Option<usize>,
    pub grid: GridSpec,
    pub selected: SelectedPoint,
    pub points: Vec<PointReport>,
    pub total_iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cold: Option<ColdComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub gamma3: f64,
    pub fnr: Option<f64>,
    pub fpr: Option<f64>,
    pub tpr: Option<f64>,
    pub n_selected: Option<usize>,
    pub iterations: usize,
    pub converged: bool,
}

/// Contents of `path.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathReport {
    pub gamma: f64,
    pub auc: Option<f64>,
    pub points: Vec<PathPoint>,
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn read_sidecar(path: &Path) -> Result<SimSidecar, CliError> {
    read_json(path)
}

pub fn evaluate(result: &BiclusterResult, truth: &Truth) -> Result<Evaluation, CliError> {
    let p = truth.informative.len();
    if result.col_labels.len() != p || result.row_labels.len() != truth.row_labels.len() {
        return Err(CliError::Parse(format!(
            "result is {}×{} but truth is {}×{p}",
            result.row_labels.len(),
            result.col_labels.len(),
            truth.row_labels.len()
        )));
    }
    let fitted_cols: Vec<usize> = (0..p)
        .filter(|&j| truth.informative[j])
        .map(|j| result.col_labels[j])
        .collect();
    let (fnr, fpr) = selection_rates(&result.feature_mask, &truth.informative).map_err(|e| CliError::Parse(e.to_string()))?;
    Ok(Evaluation {
        row_ari: adjusted_rand_index(&result.row_labels, &truth.row_labels).ok(),
        col_ari: adjusted_rand_index(&fitted_cols, &truth.col_labels).ok(),
        product_ari: adjusted_rand_index(
            &product_labels(&result.row_labels, &fitted_cols),
            &product_labels(&truth.row_labels, &truth.col_labels),
        )
        .ok(),
        fnr,
        fpr,
    })
}

/// Writes `result.json` and `A_hat.csv` (on the input scale), plus the
/// heatmap when asked.
#[allow(clippy::too_many_arguments)]
fn write_fit_artifacts(
    dir: &Path,
    data: &DataMatrix,
    standardizer: &Standardizer,
    point: &GridPoint,
    report: &FitReport,
    settings: &FitSettings,
    truth: Option<&Truth>,
    heatmap: bool,
) -> Result<FitOutput, CliError> {
    let clusters = extract_clusters(&report.state.a, settings.eps);
    let evaluation = truth.map(|t| evaluate(&clusters, t)).transpose()?;
    let output = FitOutput {
        point: PointReport::new(point, Some(&Ok(report.clone())), None),
        q: settings.q,
        n_row_clusters: clusters.n_row_clusters(),
        n_col_clusters: clusters.n_col_clusters(),
        n_selected: clusters.n_selected(),
        clusters,
        evaluation,
    };
    let a_hat = DataMatrix {
        values: standardizer.invert(&report.state.a),
        row_names: data.row_names.clone(),
        col_names: data.col_names.clone(),
    };
    write_matrix(&dir.join(A_HAT_FILE), &a_hat)?;
    if heatmap {
        render_heatmap(&a_hat.values, &dir.join(HEATMAP_FILE))?;
    }
    write_json(&dir.join(RESULT_FILE), &output)?;
    Ok(output)
}

fn not_converged(report: &FitReport, dir: &Path) -> CliError {
    CliError::NotConverged(format!(
        "no convergence after {} iterations; artifacts written to {}",
        report.iterations,
        dir.display()
    ))
}

fn resolve_fusion(args: &FitArgs, file: &FileConfig) -> FusionPenalty {
    if let (Some(gamma1), Some(gamma2)) = (args.gamma1, args.gamma2) {
        return FusionPenalty::Separate { gamma1, gamma2 };
    }
    if let Some(gamma) = args.gamma {
        return FusionPenalty::Combined { gamma };
    }
    if let (Some(gamma1), Some(gamma2)) = (file.gamma1, file.gamma2) {
        return FusionPenalty::Separate { gamma1, gamma2 };
    }
    FusionPenalty::Combined {
        gamma: file.gamma.unwrap_or(DEFAULT_GAMMA),
    }
}

pub fn cmd_fit(args: &FitArgs) -> Result<(), CliError> {
    let file = config::load(args.model.config.as_deref())?;
    let input = input_path(&args.input, &file.input, "input")?;
    let truth_path = pick_opt(&args.truth, &file.truth);
    if let Some(p) = &truth_path {
        input_path(&Some(p.clone()), &None, "truth")?;
    }
    let out = output_dir(&args.out, &file.out)?;
    let settings = config::settings(&args.model, &file);
    let point = GridPoint {
        fusion: resolve_fusion(args, &file),
        gamma3: pick(&args.gamma3, &file.gamma3, 0.0),
    };

    let data = read_matrix(&input)?;
    let truth = truth_path.as_deref().map(read_sidecar).transpose()?;
    let init = args
        .init
        .as_deref()
        .map(|p| read_text(p).and_then(|s| AdmmState::from_json(&s).map_err(CliError::from)))
        .transpose()?;

    let prep = prepare(&data.values, &settings)?;
    let (weights, pilot) = pilot_weights(&prep.x, &prep.weights, point.fusion, &settings)?;
    let report = fit(&prep.x, &settings.config(&point, weights), init.as_ref().or(pilot.as_ref()))?;

    write_fit_artifacts(
        &out,
        &data,
        &prep.standardizer,
        &point,
        &report,
        &settings,
        truth.as_ref().map(|s| &s.truth),
        args.heatmap,
    )?;
    if args.save_state {
        write_text(&out.join(STATE_FILE), &report.state.to_json())?;
    }
    if !report.converged {
        return Err(not_converged(&report, &out));
    }
    Ok(())
}

pub fn sim_file_stem(replicate: usize) -> String {
    format!("sim_{replicate:03}")
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let file = config::load(args.config.as_deref())?;
    let d = SimSpec::default();
    let spec = SimSpec {
        n: pick(&args.n, &file.n, d.n),
        p: pick(&args.p, &file.p, d.p),
        p_true: pick(&args.p_true, &file.p_true, d.p_true),
        k: pick(&args.k, &file.k, d.k),
        r: pick(&args.r, &file.r, d.r),
        mean_grid: file.mean_grid.clone().unwrap_or(d.mean_grid),
        sigma: pick(&args.sigma, &file.sigma, d.sigma),
        noise_variance: pick(&args.noise_variance, &file.noise_variance, d.noise_variance),
        seed: pick(&args.seed, &file.seed, d.seed),
    };
    spec.validate().map_err(|e| CliError::Parse(e.to_string()))?;
    let replicates = pick(&args.replicates, &file.replicates, 1);
    let out = output_dir(&args.out, &file.out)?;

    let written = map_range(Execution::default(), replicates, |r| {
        let rep_spec = spec.replicate(r as u64);
        let (train, val, truth) = generate_pair(&rep_spec).map_err(|e| CliError::Parse(e.to_string()))?;
        let stem = sim_file_stem(r);
        write_matrix(&out.join(format!("{stem}.csv")), &DataMatrix::new(train))?;
        if args.validation {
            write_matrix(&out.join(format!("{stem}.val.csv")), &DataMatrix::new(val))?;
        }
        let sidecar = SimSidecar {
            spec: rep_spec,
            replicate: r,
            truth,
        };
        write_json(&out.join(format!("{stem}.truth.json")), &sidecar)?;
        Ok::<_, CliError>(())
    });
    written.into_iter().collect()
}

fn relative_difference(a: &GridFit, b: &GridFit) -> Option<f64> {
    let (ra, rb) = (a.report()?, b.report()?);
    let diff = ra.state.a.sub(&rb.state.a).ok()?;
    Some(diff.frobenius_norm() / rb.state.a.frobenius_norm().max(1.0))
}

pub fn cmd_tune(args: &TuneArgs) -> Result<(), CliError> {
    let file = config::load(args.model.config.as_deref())?;
    let input = input_path(&args.input, &file.input, "input")?;
    let selection = pick(&args.select, &file.selection, Selection::Stability);
    let (val_path, truth_path) = match selection {
        Selection::Ari => (
            Some(input_path(&args.val, &file.val, "val")?),
            Some(input_path(&args.truth, &file.truth, "truth")?),
        ),
        Selection::Stability => (None, pick_opt(&args.truth, &file.truth)),
    };
    let out = output_dir(&args.out, &file.out)?;
    let settings = config::settings(&args.model, &file);
    let seed = pick(&args.model.seed, &file.seed, 0);
    let grid = GridSpec {
        gamma_ladder: pick(&args.gamma_ladder, &file.gamma_ladder, default_gamma_ladder()),
        gamma3_ladder: pick(&args.gamma3_ladder, &file.gamma3_ladder, default_gamma3_ladder()),
        mode: match pick_opt(&args.gamma2_ladder, &file.gamma2_ladder) {
            Some(gamma2_ladder) => GridMode::ThreeParameter { gamma2_ladder },
            None => GridMode::TwoParameter,
        },
    };
    grid.validate()?;

    let data = read_matrix(&input)?;
    let truth = truth_path.as_deref().map(read_sidecar).transpose()?;
    let prep = prepare(&data.values, &settings)?;

    let (fits, scores, best, bootstraps) = match selection {
        Selection::Ari => {
            let val = read_matrix(val_path.as_deref().expect("checked above"))?;
            let xv = prep.standardizer.apply(&val.values);
            let rows = &truth.as_ref().expect("checked above").truth.row_labels;
            let outcome = ari_tune(&prep.x, &prep.weights, &xv, rows, &grid, &settings)?;
            let scores: Vec<Option<f64>> = outcome.scores.iter().map(|s| s.ari).collect();
            (outcome.fits, scores, outcome.best, None)
        }
        Selection::Stability => {
            let b = pick(&args.bootstraps, &file.bootstraps, DEFAULT_BOOTSTRAPS);
            let fits = grid_search(&prep.x, &prep.weights, &grid, &settings)?;
            let outcome = stability_select(&prep.x, &grid, &settings, b, seed)?;
            let scores = outcome.scores.iter().map(|s| s.distance).collect();
            (fits, scores, outcome.best, Some(b))
        }
    };

    let points: Vec<PointReport> = fits
        .iter()
        .zip(&scores)
        .map(|(f, s)| PointReport::new(&f.point, Some(&f.outcome), *s))
        .collect();
    let cold = if args.compare_cold {
        let cold_settings = FitSettings {
            warm_start: false,
            ..settings.clone()
        };
        let cold_fits = grid_search(&prep.x, &prep.weights, &grid, &cold_settings)?;
        let iterations: Vec<usize> = cold_fits.iter().map(|f| f.report().map_or(0, |r| r.iterations)).collect();
        let max_relative_difference = fits
            .iter()
            .zip(&cold_fits)
            .filter_map(|(w, c)| relative_difference(w, c))
            .reduce(f64::max);
        Some(ColdComparison {
            total_iterations: iterations.iter().sum(),
            iterations,
            max_relative_difference,
        })
    } else {
        None
    };
    let report = GridReport {
        selection,
        seed,
        bootstraps,
        grid: grid.clone(),
        selected: SelectedPoint {
            index: best,
            point: points[best].clone(),
        },
        total_iterations: points.iter().map(|p| p.iterations).sum(),
        points,
        cold,
    };
    write_json(&out.join(GRID_REPORT_FILE), &report)?;

    let chosen = &fits[best];
    let fit_report = chosen.report().ok_or(CliError::NotConverged("selected point failed".into()))?;
    write_fit_artifacts(
        &out,
        &data,
        &prep.standardizer,
        &chosen.point,
        fit_report,
        &settings,
        truth.as_ref().map(|s| &s.truth),
        false,
    )?;
    if !fit_report.converged {
        return Err(not_converged(fit_report, &out));
    }
    Ok(())
}

pub fn cmd_path(args: &PathArgs) -> Result<(), CliError> {
    let file = config::load(args.model.config.as_deref())?;
    let input = input_path(&args.input, &file.input, "input")?;
    let truth_path = input_path(&args.truth, &file.truth, "truth")?;
    let out = output_dir(&args.out, &file.out)?;
    let settings = config::settings(&args.model, &file);
    let gamma = pick(&args.gamma, &file.gamma, DEFAULT_GAMMA);
    let ladder = pick(&args.gamma3_ladder, &file.gamma3_ladder, default_gamma3_ladder());
    let grid = GridSpec::two_parameter(vec![gamma], ladder);
    grid.validate()?;

    let data = read_matrix(&input)?;
    let sidecar = read_sidecar(&truth_path)?;
    let informative = &sidecar.truth.informative;
    if informative.len() != data.p() {
        return Err(CliError::Parse(format!(
            "truth has {} features but input has {}",
            informative.len(),
            data.p()
        )));
    }
    let prep = prepare(&data.values, &settings)?;
    let fits = grid_search(&prep.x, &prep.weights, &grid, &settings)?;

    let mut points = Vec::with_capacity(fits.len());
    let mut csv = String::from("gamma3,fnr,fpr,tpr\n");
    let mut curve = Vec::new();
    let mut all_converged = true;
    for f in &fits {
        let mut point = PathPoint {
            gamma3: f.point.gamma3,
            fnr: None,
            fpr: None,
            tpr: None,
            n_selected: None,
            iterations: 0,
            converged: false,
        };
        if let Some(r) = f.report() {
            let clusters = extract_clusters(&r.state.a, settings.eps);
            let (fnr, fpr) =
                selection_rates(&clusters.feature_mask, informative).map_err(|e| CliError::Parse(e.to_string()))?;
            let tpr = 1.0 - fnr;
            csv.push_str(&format!(
                "{},{},{},{}\n",
                format_float(f.point.gamma3),
                format_float(fnr),
                format_float(fpr),
                format_float(tpr)
            ));
            curve.push((fpr, tpr));
            point = PathPoint {
                fnr: Some(fnr),
                fpr: Some(fpr),
                tpr: Some(tpr),
                n_selected: Some(clusters.n_selected()),
                iterations: r.iterations,
                converged: r.converged,
                ..point
            };
        }
        all_converged &= point.converged;
        points.push(point);
    }
    write_text(&out.join(PATH_CSV_FILE), &csv)?;
    let auc = selection_auc(&curve).ok();
    write_json(&out.join(PATH_JSON_FILE), &PathReport { gamma, auc, points })?;
    match auc {
        Some(a) => println!("AUC {a:.4}"),
        None => println!("AUC unavailable: no usable fits"),
    }
    if !all_converged {
        return Err(CliError::NotConverged(format!(
            "some path points did not converge; artifacts written to {}",
            out.display()
        )));
    }
    Ok(())
}

pub fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    let result: FitOutput = read_json(&args.result)?;
    let sidecar = read_sidecar(&args.truth)?;
    let evaluation = evaluate(&result.clusters, &sidecar.truth)?;
    match &args.out {
        Some(path) => write_json(path, &evaluation)?,
        None => print!("{}", to_json_string(&evaluation)?),
    }
    Ok(())
}

pub fn cmd_heatmap(args: &HeatmapArgs) -> Result<(), CliError> {
    let data = read_matrix(&args.input)?;
    render_heatmap(&data.values, &args.out)?;
    Ok(())
}
