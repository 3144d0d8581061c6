mod common;

use std::path::PathBuf;
use std::process::Command;

use common::{assert_schema, read_json, write_sim};
use spacobi::io::read_matrix;
use spacobi::metrics::{adjusted_rand_index, selection_auc};
use spacobi::simgen::SimSpec;
use spacobi_cli::args::{EvalArgs, FitArgs, HeatmapArgs, ModelArgs, PathArgs, Selection, SimulateArgs, TuneArgs};
use spacobi_cli::{cmd_eval, cmd_fit, cmd_heatmap, cmd_path, cmd_simulate, cmd_tune, schema, CliError, EXIT_NOT_CONVERGED};
use tempfile::tempdir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spacobi"))
}

fn small_spec(seed: u64) -> SimSpec {
    SimSpec {
        n: 30,
        p: 40,
        p_true: 16,
        seed,
        ..SimSpec::default()
    }
}

#[test]
fn identity_with_zero_penalties_is_returned_unchanged() {
    let dir = tempdir().unwrap();
    let input = dir.path().join("eye.csv");
    std::fs::write(&input, "1.0,0.0\n0.0,1.0\n").unwrap();
    cmd_fit(&FitArgs {
        input: Some(input.clone()),
        out: Some(dir.path().to_path_buf()),
        gamma: Some(0.0),
        gamma3: Some(0.0),
        ..FitArgs::default()
    })
    .unwrap();
    let a_hat = read_matrix(&dir.path().join("A_hat.csv")).unwrap().values;
    let x = read_matrix(&input).unwrap().values;
    for (a, b) in a_hat.as_slice().iter().zip(x.as_slice()) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
    assert_schema(schema::RESULT, &dir.path().join("result.json"));
}

#[test]
fn malformed_row_exits_1_with_line_number() {
    let dir = tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    std::fs::write(&input, "a,b,c\n1,2,3\n4,5,6\n7,oops,9\n").unwrap();
    let out = bin()
        .args(["fit", "--input"])
        .arg(&input)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 4"), "{stderr}");
}

#[test]
fn missing_input_exits_3() {
    let dir = tempdir().unwrap();
    let out = bin()
        .args(["fit", "--input"])
        .arg(dir.path().join("absent.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn iteration_cap_exits_2_and_still_writes_artifacts() {
    let dir = tempdir().unwrap();
    write_sim(dir.path(), "x", &small_spec(1));
    let out = bin()
        .args(["fit", "--gamma", "40", "--gamma3", "5", "--max-iter", "5", "--heatmap", "--input"])
        .arg(dir.path().join("x.csv"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_NOT_CONVERGED));
    let result = read_json(&dir.path().join("result.json"));
    assert_eq!(result["converged"], false);
    assert!(dir.path().join("A_hat.csv").exists());
    assert!(dir.path().join("heatmap.pgm").exists());
}

#[test]
fn checkerboard_fit_recovers_rows() {
    let dir = tempdir().unwrap();
    write_sim(dir.path(), "x", &SimSpec::default());
    cmd_fit(&FitArgs {
        input: Some(dir.path().join("x.csv")),
        out: Some(dir.path().to_path_buf()),
        truth: Some(dir.path().join("x.truth.json")),
        gamma: Some(50.0),
        gamma3: Some(10.0),
        ..FitArgs::default()
    })
    .unwrap();
    let result = read_json(&dir.path().join("result.json"));
    let ari = result["evaluation"]["row_ari"].as_f64().unwrap();
    assert!(ari >= 0.6, "row ARI {ari}");
    assert_schema(schema::RESULT, &dir.path().join("result.json"));

    cmd_eval(&EvalArgs {
        result: dir.path().join("result.json"),
        truth: dir.path().join("x.truth.json"),
        out: Some(dir.path().join("eval.json")),
    })
    .unwrap();
    assert_eq!(read_json(&dir.path().join("eval.json")), result["evaluation"]);
    assert_schema(schema::EVALUATION, &dir.path().join("eval.json"));
}

#[test]
fn config_file_sits_between_flags_and_defaults() {
    let dir = tempdir().unwrap();
    write_sim(dir.path(), "x", &small_spec(2));
    let config = dir.path().join("config.json");
    std::fs::write(&config, r#"{"gamma": 30.0, "gamma3": 7.0, "q": "1"}"#).unwrap();
    cmd_fit(&FitArgs {
        input: Some(dir.path().join("x.csv")),
        out: Some(dir.path().to_path_buf()),
        gamma3: Some(3.0),
        model: ModelArgs {
            config: Some(config),
            ..ModelArgs::default()
        },
        ..FitArgs::default()
    })
    .unwrap();
    let result = read_json(&dir.path().join("result.json"));
    assert_eq!(result["gamma"], 30.0);
    assert_eq!(result["gamma3"], 3.0);
    assert_eq!(result["q"], "1");

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"gama": 1}"#).unwrap();
    let err = cmd_fit(&FitArgs {
        input: Some(dir.path().join("x.csv")),
        model: ModelArgs {
            config: Some(bad),
            ..ModelArgs::default()
        },
        ..FitArgs::default()
    })
    .unwrap_err();
    assert!(matches!(err, CliError::Parse(_)));
}

#[test]
fn saved_state_resumes_at_the_solution() {
    let dir = tempdir().unwrap();
    write_sim(dir.path(), "x", &small_spec(3));
    let args = FitArgs {
        input: Some(dir.path().join("x.csv")),
        out: Some(dir.path().join("first")),
        gamma: Some(40.0),
        gamma3: Some(5.0),
        save_state: true,
        ..FitArgs::default()
    };
    cmd_fit(&args).unwrap();
    cmd_fit(&FitArgs {
        out: Some(dir.path().join("second")),
        init: Some(dir.path().join("first/state.json")),
        save_state: false,
        ..args
    })
    .unwrap();
    let first = read_json(&dir.path().join("first/result.json"));
    let second = read_json(&dir.path().join("second/result.json"));
    assert!(second["iterations"].as_u64().unwrap() < first["iterations"].as_u64().unwrap());
    assert_eq!(first["row_labels"], second["row_labels"]);
}

#[test]
fn simulate_honours_seed_and_replicates() {
    let dir = tempdir().unwrap();
    let args = |out: PathBuf| SimulateArgs {
        out: Some(out),
        n: Some(20),
        p: Some(30),
        p_true: Some(12),
        replicates: Some(3),
        seed: Some(11),
        ..SimulateArgs::default()
    };
    cmd_simulate(&args(dir.path().join("a"))).unwrap();
    cmd_simulate(&args(dir.path().join("b"))).unwrap();
    let mut names: Vec<String> = std::fs::read_dir(dir.path().join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        ["sim_000.csv", "sim_000.truth.json", "sim_001.csv", "sim_001.truth.json", "sim_002.csv", "sim_002.truth.json"]
    );
    for name in &names {
        let a = std::fs::read(dir.path().join("a").join(name)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
    for r in 0..3 {
        let path = dir.path().join(format!("a/sim_{r:03}.truth.json"));
        assert_schema(schema::SIM_TRUTH, &path);
        let sidecar = read_json(&path);
        assert_eq!(sidecar["spec"]["seed"], 11 + r);
        let trues = sidecar["truth"]["informative"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|v| v.as_bool().unwrap())
            .count();
        assert_eq!(trues, 12);
    }
    assert_ne!(
        std::fs::read(dir.path().join("a/sim_000.csv")).unwrap(),
        std::fs::read(dir.path().join("a/sim_001.csv")).unwrap()
    );
}

#[test]
fn one_point_tune_equals_fit() {
    let dir = tempdir().unwrap();
    write_sim(dir.path(), "x", &small_spec(4));
    cmd_fit(&FitArgs {
        input: Some(dir.path().join("x.csv")),
        out: Some(dir.path().join("fit")),
        gamma: Some(40.0),
        gamma3: Some(5.0),
        ..FitArgs::default()
    })
    .unwrap();
    cmd_tune(&TuneArgs {
        input: Some(dir.path().join("x.csv")),
        out: Some(dir.path().join("tune")),
        gamma_ladder: Some(vec![40.0]),
        gamma3_ladder: Some(vec![5.0]),
        bootstraps: Some(1),
        ..TuneArgs::default()
    })
    .unwrap();
    for name in ["A_hat.csv", "result.json"] {
        assert_eq!(
            std::fs::read(dir.path().join("fit").join(name)).unwrap(),
            std::fs::read(dir.path().join("tune").join(name)).unwrap(),
            "{name}"
        );
    }
    assert_schema(schema::GRID_REPORT, &dir.path().join("tune/grid_report.json"));
}

#[test]
fn tune_reports_warm_and_cold_totals() {
    let dir = tempdir().unwrap();
    write_sim(dir.path(), "x", &small_spec(5));
    cmd_tune(&TuneArgs {
        input: Some(dir.path().join("x.csv")),
        out: Some(dir.path().to_path_buf()),
        gamma_ladder: Some(vec![40.0]),
        gamma3_ladder: Some(vec![1.0, 2.0, 4.0, 8.0, 16.0]),
        bootstraps: Some(1),
        compare_cold: true,
        ..TuneArgs::default()
    })
    .unwrap();
    let path = dir.path().join("grid_report.json");
    assert_schema(schema::GRID_REPORT, &path);
    let report = read_json(&path);
    let warm: u64 = report["points"].as_array().unwrap().iter().map(|p| p["iterations"].as_u64().unwrap()).sum();
    assert_eq!(report["total_iterations"].as_u64().unwrap(), warm);
    let cold = &report["cold"];
    let cold_sum: u64 = cold["iterations"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(cold["total_iterations"].as_u64().unwrap(), cold_sum);
    assert!(warm < cold_sum, "warm {warm} vs cold {cold_sum}");
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum()
}

#[test]
fn ari_selection_matches_exhaustive_scoring() {
    let dir = tempdir().unwrap();
    let spec = SimSpec {
        n: 40,
        p: 60,
        p_true: 20,
        seed: 6,
        ..SimSpec::default()
    };
    let sidecar = write_sim(dir.path(), "x", &spec);
    let ladder = [1.0, 10.0, 100.0];
    let model = ModelArgs {
        tol: Some(1e-7),
        ..ModelArgs::default()
    };
    cmd_tune(&TuneArgs {
        input: Some(dir.path().join("x.csv")),
        out: Some(dir.path().join("tune")),
        select: Some(Selection::Ari),
        val: Some(dir.path().join("x.val.csv")),
        truth: Some(dir.path().join("x.truth.json")),
        gamma_ladder: Some(vec![40.0]),
        gamma3_ladder: Some(ladder.to_vec()),
        model: model.clone(),
        ..TuneArgs::default()
    })
    .unwrap();
    let report = read_json(&dir.path().join("tune/grid_report.json"));

    // each point fitted on its own, scored by nearest Â-centroid on the
    // validation rows in the input scale
    let val = read_matrix(&dir.path().join("x.val.csv")).unwrap().values;
    let mut best: Option<(f64, usize, usize)> = None;
    for (k, &g3) in ladder.iter().enumerate() {
        let out = dir.path().join(format!("fit{k}"));
        cmd_fit(&FitArgs {
            input: Some(dir.path().join("x.csv")),
            out: Some(out.clone()),
            gamma: Some(40.0),
            gamma3: Some(g3),
            model: model.clone(),
            ..FitArgs::default()
        })
        .unwrap();
        let a_hat = read_matrix(&out.join("A_hat.csv")).unwrap().values;
        let result = read_json(&out.join("result.json"));
        let labels: Vec<usize> = result["row_labels"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_u64().unwrap() as usize)
            .collect();
        let clusters = labels.iter().max().unwrap() + 1;
        let centroids: Vec<Vec<f64>> = (0..clusters)
            .map(|c| {
                let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
                (0..a_hat.cols())
                    .map(|j| members.iter().map(|&i| a_hat[(i, j)]).sum::<f64>() / members.len() as f64)
                    .collect()
            })
            .collect();
        let assigned: Vec<usize> = (0..val.rows())
            .map(|i| {
                (0..clusters)
                    .min_by(|&s, &t| sq_dist(val.row(i), &centroids[s]).total_cmp(&sq_dist(val.row(i), &centroids[t])))
                    .unwrap()
            })
            .collect();
        let ari = adjusted_rand_index(&assigned, &sidecar.truth.row_labels).unwrap();
        let selected = result["n_selected"].as_u64().unwrap() as usize;
        let score = report["points"][k]["score"].as_f64().unwrap();
        assert!((score - ari).abs() < 1e-9, "point {k}: {score} vs {ari}");
        let better = match best {
            None => true,
            Some((b, s, _)) => ari > b || (ari == b && selected < s),
        };
        if better {
            best = Some((ari, selected, k));
        }
    }
    assert_eq!(report["selected"]["index"].as_u64().unwrap() as usize, best.unwrap().2);
}

#[test]
fn path_endpoints_ordering_and_auc() {
    let dir = tempdir().unwrap();
    write_sim(dir.path(), "x", &small_spec(7));
    let ladder: Vec<f64> = spacobi::select::log_ladder(0.0, 7.5, 8);
    cmd_path(&PathArgs {
        input: Some(dir.path().join("x.csv")),
        truth: Some(dir.path().join("x.truth.json")),
        out: Some(dir.path().to_path_buf()),
        gamma: Some(40.0),
        gamma3_ladder: Some(ladder.clone()),
        ..PathArgs::default()
    })
    .unwrap();
    let csv = std::fs::read_to_string(dir.path().join("fnr_fpr_path.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("gamma3,fnr,fpr,tpr"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), ladder.len());
    for (row, g) in rows.iter().zip(&ladder) {
        assert_eq!(row[0], *g);
        assert!((row[1] + row[3] - 1.0).abs() < 1e-15);
    }
    assert_eq!((rows[0][1], rows[0][2]), (0.0, 1.0), "smallest γ3 keeps every feature");

    // independent trapezoid over the anchored, sorted curve
    let mut pts: Vec<(f64, f64)> = rows.iter().map(|r| (r[2], r[3])).collect();
    pts.push((0.0, 0.0));
    pts.push((1.0, 1.0));
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let area: f64 = pts.windows(2).map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0).sum();

    let report = read_json(&dir.path().join("path.json"));
    let auc = report["auc"].as_f64().unwrap();
    assert!((auc - area).abs() < 1e-12, "{auc} vs {area}");
    let curve: Vec<(f64, f64)> = rows.iter().map(|r| (r[2], r[3])).collect();
    assert!((auc - selection_auc(&curve).unwrap()).abs() < 1e-15);
    assert_schema(schema::PATH_REPORT, &dir.path().join("path.json"));
}

#[test]
fn heatmap_of_anti_diagonal() {
    let dir = tempdir().unwrap();
    let input = dir.path().join("m.csv");
    std::fs::write(&input, "0,1\n1,0\n").unwrap();
    let out = dir.path().join("m.pgm");
    cmd_heatmap(&HeatmapArgs { input, out: out.clone() }).unwrap();
    assert_eq!(std::fs::read(out).unwrap(), b"P5\n2 2\n255\n\x00\xff\xff\x00");
}
