//! CSV tables, metadata sidecars and VTK files.

use std::fs;

use poro_cli::config::{parse_config, Experiment, RunConfig};
use poro_cli::table::{config_hash, metadata_path, write_csv, write_metadata, ResultTable};
use poro_cli::vtk::{vtk_string, VtkField};
use poro_core::mesh::build_unit_square_mesh;

fn sample_table() -> ResultTable {
    let mut t = ResultTable::new(["h", "err", "rate"]);
    t.push(vec![Some(0.25), Some(1.5e-3), None]);
    t.push(vec![Some(0.125), Some(3.75e-4), Some(2.0)]);
    t
}

#[test]
fn csv_is_deterministic_and_round_trips() {
    let t = sample_table();
    let a = t.to_csv_string();
    assert_eq!(a, sample_table().to_csv_string());
    assert!(a.starts_with("h,err,rate\n"));
    assert_eq!(a.lines().nth(1).unwrap().split(',').last(), Some(""));
    assert_eq!(ResultTable::from_csv_str(&a).unwrap(), t);
    assert_eq!(t.column("err").unwrap(), vec![Some(1.5e-3), Some(3.75e-4)]);
    assert!(t.column("missing").is_none());
}

#[test]
fn empty_table_is_header_only() {
    let t = ResultTable::new(["a", "b"]);
    assert_eq!(t.to_csv_string(), "a,b\n");
    assert_eq!(ResultTable::from_csv_str("a,b\n").unwrap(), t);
    assert!(ResultTable::from_csv_str("a,b\n1,x\n").is_err());
}

#[test]
fn metadata_sidecar_reproduces_the_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("run.csv");
    write_csv(&sample_table(), &csv).unwrap();
    let mut cfg = RunConfig::preset(Experiment::Iterate);
    cfg.set("tol", "1e-9").unwrap();
    let text = cfg.to_text();
    write_metadata(&csv, &text).unwrap();

    let meta_path = metadata_path(&csv);
    assert_eq!(meta_path.file_name().unwrap(), "run.csv.meta");
    let meta = fs::read_to_string(meta_path).unwrap();
    assert!(meta.starts_with(&format!("# config_hash = {}\n", config_hash(&text))));
    assert_eq!(parse_config(&meta).unwrap(), cfg);
    assert_eq!(config_hash(&text).len(), 64);
    assert_ne!(config_hash(&text), config_hash("mu = 2.0"));
}

/// Minimal reader for the legacy ASCII format, independent of the writer.
struct ParsedVtk {
    points: Vec<[f64; 3]>,
    cells: Vec<Vec<usize>>,
    types: Vec<u32>,
    scalars: Vec<(String, Vec<f64>)>,
    vectors: Vec<(String, Vec<[f64; 3]>)>,
}

fn parse_vtk(text: &str) -> ParsedVtk {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# vtk DataFile Version 3.0"));
    lines.next();
    assert_eq!(lines.next(), Some("ASCII"));
    assert_eq!(lines.next(), Some("DATASET UNSTRUCTURED_GRID"));
    let mut tokens = lines.flat_map(str::split_whitespace);
    let mut next = || tokens.next().expect("truncated file");
    let mut out = ParsedVtk { points: vec![], cells: vec![], types: vec![], scalars: vec![], vectors: vec![] };
    let mut npoints = 0;
    loop {
        let Some(kw) = std::iter::from_fn(|| Some(next())).next() else { break };
        match kw {
            "POINTS" => {
                npoints = next().parse().unwrap();
                assert_eq!(next(), "double");
                for _ in 0..npoints {
                    out.points.push([0; 3].map(|_| next().parse().unwrap()));
                }
            }
            "CELLS" => {
                let n: usize = next().parse().unwrap();
                let size: usize = next().parse().unwrap();
                let mut used = 0;
                for _ in 0..n {
                    let k: usize = next().parse().unwrap();
                    out.cells.push((0..k).map(|_| next().parse().unwrap()).collect());
                    used += k + 1;
                }
                assert_eq!(used, size);
            }
            "CELL_TYPES" => {
                let n: usize = next().parse().unwrap();
                out.types = (0..n).map(|_| next().parse().unwrap()).collect();
            }
            "POINT_DATA" => assert_eq!(next().parse::<usize>().unwrap(), npoints),
            "SCALARS" => {
                let name = next().to_string();
                assert_eq!((next(), next(), next(), next()), ("double", "1", "LOOKUP_TABLE", "default"));
                out.scalars.push((name, (0..npoints).map(|_| next().parse().unwrap()).collect()));
            }
            "VECTORS" => {
                let name = next().to_string();
                assert_eq!(next(), "double");
                out.vectors.push((name, (0..npoints).map(|_| [0; 3].map(|_| next().parse().unwrap())).collect()));
            }
            "END" => break,
            other => panic!("unexpected keyword {other}"),
        }
    }
    out
}

#[test]
fn vtk_of_one_square_parses_back() {
    let mesh = build_unit_square_mesh(1).unwrap();
    let fields = [
        VtkField::Scalar("phi".into(), vec![0.0, 1.5, -2.0, 3.25e-7]),
        VtkField::Vector("u".into(), vec![[1.0, 0.0], [0.0, 1.0], [0.5, -0.5], [2.0, 3.0]]),
    ];
    let mut text = vtk_string(&mesh, &fields, "two triangles").unwrap();
    text.push_str("END\n");
    let v = parse_vtk(&text);
    assert_eq!(v.points.len(), 4);
    for (p, q) in v.points.iter().zip(mesh.vertices()) {
        assert_eq!([p[0], p[1], p[2]], [q[0], q[1], 0.0]);
    }
    assert_eq!(v.cells.len(), 2);
    for (c, t) in v.cells.iter().zip(mesh.triangles()) {
        assert_eq!(c.as_slice(), t.as_slice());
    }
    assert_eq!(v.types, vec![5, 5]);
    assert_eq!(v.scalars, vec![("phi".to_string(), vec![0.0, 1.5, -2.0, 3.25e-7])]);
    assert_eq!(v.vectors[0].0, "u");
    assert_eq!(v.vectors[0].1[3], [2.0, 3.0, 0.0]);
}

#[test]
fn vtk_rejects_mismatched_fields() {
    let mesh = build_unit_square_mesh(1).unwrap();
    assert!(vtk_string(&mesh, &[VtkField::Scalar("phi".into(), vec![0.0; 3])], "").is_err());
    assert!(vtk_string(&mesh, &[VtkField::Scalar("two words".into(), vec![0.0; 4])], "").is_err());
}
