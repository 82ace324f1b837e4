//! Legacy ASCII VTK output of vertex fields.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use poro_core::mesh::Mesh;

#[derive(Debug, Clone, PartialEq)]
pub enum VtkField {
    Scalar(String, Vec<f64>),
    Vector(String, Vec<[f64; 2]>),
}

impl VtkField {
    fn len(&self) -> usize {
        match self {
            VtkField::Scalar(_, v) => v.len(),
            VtkField::Vector(_, v) => v.len(),
        }
    }

    fn name(&self) -> &str {
        match self {
            VtkField::Scalar(n, _) | VtkField::Vector(n, _) => n,
        }
    }
}

pub fn vtk_string(mesh: &Mesh, fields: &[VtkField], title: &str) -> io::Result<String> {
    let nv = mesh.n_vertices();
    for f in fields {
        if f.len() != nv {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                format!("field '{}' has {} values for {nv} vertices", f.name(), f.len()),
            ));
        }
        if f.name().is_empty() || f.name().contains(char::is_whitespace) {
            return Err(io::Error::new(io::ErrorKind::InvalidInput, format!("bad field name '{}'", f.name())));
        }
    }
    let mut s = String::new();
    let title = title.lines().next().unwrap_or("");
    let _ = write!(s, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {nv} double");
    for p in mesh.vertices() {
        let _ = writeln!(s, "{:e} {:e} 0", p[0], p[1]);
    }
    let nt = mesh.n_triangles();
    let _ = writeln!(s, "CELLS {nt} {}", 4 * nt);
    for t in mesh.triangles() {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {nt}");
    for _ in 0..nt {
        s.push_str("5\n");
    }
    if !fields.is_empty() {
        let _ = writeln!(s, "POINT_DATA {nv}");
    }
    for f in fields {
        match f {
            VtkField::Scalar(name, v) => {
                let _ = write!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default\n");
                for x in v {
                    let _ = writeln!(s, "{x:e}");
                }
            }
            VtkField::Vector(name, v) => {
                let _ = writeln!(s, "VECTORS {name} double");
                for x in v {
                    let _ = writeln!(s, "{:e} {:e} 0", x[0], x[1]);
                }
            }
        }
    }
    Ok(s)
}

pub fn write_vtk(mesh: &Mesh, fields: &[VtkField], path: &Path) -> io::Result<()> {
    fs::write(path, vtk_string(mesh, fields, "poroelastic fields")?)
}
