use pfmix::output::{self, STATS_HEADER};
use pfmix::scenario::{run_scenario, ScenarioConfig, ScenarioId, StatsRow};

fn parse_opt(s: &str) -> Option<f64> {
    (s != "-").then(|| s.parse().unwrap())
}

fn read_rows(path: &std::path::Path) -> (Vec<String>, Vec<StatsRow>) {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            StatsRow {
                step: r[0].parse().unwrap(),
                dofs: r[1].parse().unwrap(),
                avg_lin: parse_opt(&r[2]),
                avg_cg: parse_opt(&r[3]),
                n_as: (&r[4] != "-").then(|| r[4].parse().unwrap()),
                cod_max: parse_opt(&r[5]),
                tcv: parse_opt(&r[6]),
                e_bulk: parse_opt(&r[7]),
                e_crack: parse_opt(&r[8]),
                u_y_point: parse_opt(&r[9]),
            }
        })
        .collect();
    (header, rows)
}

#[test]
fn run_output_round_trips_through_csv_and_vtk() {
    let mut cfg = ScenarioConfig::new(ScenarioId::Sneddon);
    cfg.steps = 2;
    let run = run_scenario(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    output::write_run(dir.path(), &run, true).unwrap();

    let (header, rows) = read_rows(&dir.path().join("stats.csv"));
    assert_eq!(header.join(","), STATS_HEADER);
    assert_eq!(rows, run.rows);

    let mut prof = csv::Reader::from_path(dir.path().join("cod_profile.csv")).unwrap();
    let back: Vec<(f64, f64, f64)> = prof.deserialize().map(|r| r.unwrap()).collect();
    assert_eq!(back, run.cod_profile);

    let vtk = std::fs::read_to_string(dir.path().join("fields.vtk")).unwrap();
    check_vtk(&vtk, run.disc.mesh().n_cells());
}

/// Minimal grammar check of a legacy ASCII unstructured grid file.
fn check_vtk(text: &str, n_cells: usize) {
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# vtk DataFile Version"));
    lines.next().unwrap();
    assert_eq!(lines.next(), Some("ASCII"));
    assert_eq!(lines.next(), Some("DATASET UNSTRUCTURED_GRID"));
    let points: Vec<&str> = lines.next().unwrap().split_whitespace().collect();
    assert_eq!((points[0], points[2]), ("POINTS", "double"));
    let np: usize = points[1].parse().unwrap();
    for _ in 0..np {
        let v: Vec<f64> = lines.next().unwrap().split_whitespace().map(|s| s.parse().unwrap()).collect();
        assert_eq!(v.len(), 3);
    }
    let cells: Vec<usize> = lines.next().unwrap()["CELLS ".len()..].split_whitespace().map(|s| s.parse().unwrap()).collect();
    assert_eq!(cells, vec![n_cells, 5 * n_cells]);
    for _ in 0..n_cells {
        let v: Vec<usize> = lines.next().unwrap().split_whitespace().map(|s| s.parse().unwrap()).collect();
        assert_eq!(v[0], 4);
        assert!(v[1..].iter().all(|&i| i < np));
    }
    assert_eq!(lines.next(), Some(format!("CELL_TYPES {n_cells}").as_str()));
    for _ in 0..n_cells {
        assert_eq!(lines.next(), Some("9"));
    }
    assert_eq!(lines.next(), Some(format!("POINT_DATA {np}").as_str()));
    assert_eq!(lines.next(), Some("VECTORS u double"));
    for _ in 0..np {
        assert_eq!(lines.next().unwrap().split_whitespace().count(), 3);
    }
    for name in ["p", "phi"] {
        assert_eq!(lines.next(), Some(format!("SCALARS {name} double 1").as_str()));
        assert_eq!(lines.next(), Some("LOOKUP_TABLE default"));
        for _ in 0..np {
            lines.next().unwrap().parse::<f64>().unwrap();
        }
    }
    assert_eq!(lines.next(), None);
}

#[test]
fn empty_report_has_only_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("stats.csv");
    output::write_stats(&path, &[]).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), format!("{STATS_HEADER}\n"));
}

#[test]
fn unwritable_directory_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain");
    std::fs::write(&file, "x").unwrap();
    let err = output::write_stats(&file.join("stats.csv"), &[]).unwrap_err();
    assert!(matches!(err, pfmix::Error::Io { .. }), "{err}");
}

#[test]
fn hanging_block_runs_are_deterministic() {
    let mut cfg = ScenarioConfig::new(ScenarioId::HangingBlock);
    cfg.steps = 2;
    let a = run_scenario(&cfg).unwrap();
    let b = run_scenario(&cfg).unwrap();
    assert_eq!(a.rows, b.rows);
    assert!(a.x.iter().zip(&b.x).all(|(x, y)| x.to_bits() == y.to_bits()));
}
