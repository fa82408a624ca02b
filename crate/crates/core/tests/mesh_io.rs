mod common;

use std::io::BufReader;
use std::path::PathBuf;

use common::*;
use reservoir_inversion::mesh::msh::{import_msh, write_msh, MshError, TagDictionary};
use reservoir_inversion::mesh::native::{read_native, to_native_string};
use reservoir_inversion::mesh::vtk::write_vtk;
use reservoir_inversion::mesh::{validate, BoundaryTag, Mesh};

fn msh_text(mesh: &Mesh) -> String {
    let mut buf = Vec::new();
    write_msh(mesh, &TagDictionary::default(), &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

fn import(text: &str) -> Result<Mesh, MshError> {
    import_msh(BufReader::new(text.as_bytes()), &TagDictionary::default())
}

fn assert_same(a: &Mesh, b: &Mesh) {
    assert_eq!(a.nodes, b.nodes);
    assert_eq!(a.tets, b.tets);
    assert_eq!(a.boundary.len(), b.boundary.len());
    for (x, y) in a.boundary.iter().zip(&b.boundary) {
        assert_eq!((x.nodes, x.tag), (y.nodes, y.tag));
    }
}

#[test]
fn generated_meshes_are_valid() {
    for bench in [tiny(), underdetermined()] {
        assert!(validate(&bench.mesh).is_empty(), "{:?}", validate(&bench.mesh));
        for tag in BoundaryTag::ALL {
            assert!(!bench.mesh.nodes_with_tag(tag).is_empty(), "no {tag} nodes");
        }
    }
    let p = &tiny().partition;
    assert_eq!((p.n1(), p.n2(), p.n3()), (45, 180, 75));
}

#[test]
fn msh_round_trip_preserves_the_mesh() {
    let mesh = tiny().mesh;
    let back = import(&msh_text(&mesh)).unwrap();
    assert_same(&mesh, &back);
    assert!(validate(&back).is_empty());
}

#[test]
fn native_round_trip_is_exact() {
    let mesh = underdetermined().mesh;
    let text = to_native_string(&mesh);
    let back = read_native(BufReader::new(text.as_bytes())).unwrap();
    assert_same(&mesh, &back);
    assert_eq!(to_native_string(&back), text);
}

fn line_of(text: &str, starts_with: &str) -> usize {
    text.lines().position(|l| l.starts_with(starts_with)).unwrap() + 1
}

#[test]
fn corrupted_msh_reports_the_line() {
    let text = msh_text(&tiny().mesh);

    let bad_node = line_of(&text, "$Nodes") + 3;
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    lines[bad_node - 1] = "3 0.0 zero 0.0".into();
    match import(&lines.join("\n")) {
        Err(MshError::Parse { line, .. }) => assert_eq!(line, bad_node),
        other => panic!("expected a parse error, got {other:?}"),
    }

    let cut = line_of(&text, "$Elements") + 5;
    let truncated: String = text.lines().take(cut).map(|l| format!("{l}\n")).collect();
    match import(&truncated) {
        Err(MshError::Parse { line, message }) => {
            assert_eq!(line, cut + 1);
            assert!(message.contains("end of file"), "{message}");
        }
        other => panic!("expected a parse error, got {other:?}"),
    }

    let no_nodes = text.replace("$Nodes", "$Knots").replace("$EndNodes", "$EndKnots");
    assert!(import(&no_nodes).is_err());
}

#[test]
fn corrupted_native_reports_the_line() {
    let text = to_native_string(&tiny().mesh);
    let target = line_of(&text, "t 7 ");
    let broken: String =
        text.lines().enumerate().map(|(i, l)| if i + 1 == target { "t 7 0 1 2\n".into() } else { format!("{l}\n") }).collect();
    match read_native(BufReader::new(broken.as_bytes())) {
        Err(MshError::Parse { line, .. }) => assert_eq!(line, target),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

#[test]
fn tiny_vtk_matches_golden_file() {
    let mesh = tiny().mesh;
    let normals = mesh.nodal_normals(BoundaryTag::ReservoirWall);
    let mut buf = Vec::new();
    write_vtk(&mesh, "tiny reservoir", &[("wall_normal", &normals)], &mut buf).unwrap();
    let got = String::from_utf8(buf).unwrap();
    let path = golden("tiny.vtk");
    if std::env::var_os("RESINV_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &got).unwrap();
    }
    let want = std::fs::read_to_string(&path).expect("golden file; rerun with RESINV_BLESS=1 to create it");
    assert!(got == want, "VTK output differs from {}", path.display());
}
