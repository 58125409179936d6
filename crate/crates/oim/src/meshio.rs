//! The `oimesh` text format.
//!
//! ```text
//! oimesh 1
//! vertices <n>
//! <x> <y>                  (n lines)
//! triangles <m>
//! <i> <j> <k> <region>     (m lines, region 1 or 2)
//! bedges <k>
//! <i> <j> <marker>         (marker dirA | dirB | neu)
//! iedges <l>
//! <i> <j> <tri1> <tri2>    (tri1 in region 1, tri2 in region 2)
//! ```
//!
//! Indices are 0-based. Reading parses the sections and then runs the full
//! mesh validation; violations are reported with the file line of the
//! offending entity where one exists.

use std::fmt;
use std::path::Path;

use oim_core::mesh::{
    BoundaryEdge, BoundaryMarker, InterfaceEdge, InterfaceMesh, MeshError, Region, Triangle,
};
use oim_core::Vec2;

#[derive(Clone, Debug)]
pub struct MeshIoError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for MeshIoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for MeshIoError {}

fn err_at(line: usize, message: impl Into<String>) -> MeshIoError {
    MeshIoError { line: Some(line), message: message.into() }
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines { iter: text.lines().enumerate() }
    }

    /// Next non-blank line as (1-based number, trimmed content).
    fn next_content(&mut self) -> Option<(usize, &'a str)> {
        for (k, raw) in self.iter.by_ref() {
            let trimmed = raw.trim();
            if !trimmed.is_empty() {
                return Some((k + 1, trimmed));
            }
        }
        None
    }
}

fn parse_count(line: usize, content: &str, section: &str) -> Result<usize, MeshIoError> {
    let mut parts = content.split_whitespace();
    let head = parts.next().unwrap_or("");
    if head != section {
        return Err(err_at(line, format!("expected '{section} <count>', found '{content}'")));
    }
    let count = parts
        .next()
        .ok_or_else(|| err_at(line, format!("missing count after '{section}'")))?
        .parse::<usize>()
        .map_err(|_| err_at(line, format!("bad count in '{section}' header")))?;
    if parts.next().is_some() {
        return Err(err_at(line, format!("trailing tokens in '{section}' header")));
    }
    Ok(count)
}

pub fn parse_mesh(text: &str) -> Result<InterfaceMesh, MeshIoError> {
    let mut lines = Lines::new(text);
    let (line, header) = lines
        .next_content()
        .ok_or(MeshIoError { line: None, message: "empty mesh file".into() })?;
    if header != "oimesh 1" {
        return Err(err_at(line, "expected header 'oimesh 1'"));
    }

    let (line, content) =
        lines.next_content().ok_or(err_at(line, "missing 'vertices' section"))?;
    let n_vertices = parse_count(line, content, "vertices")?;
    let mut vertices = Vec::with_capacity(n_vertices);
    let mut vertex_lines = Vec::with_capacity(n_vertices);
    for k in 0..n_vertices {
        let (line, content) =
            lines.next_content().ok_or(err_at(line, format!("missing vertex {k}")))?;
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(err_at(line, "expected 'x y'"));
        }
        let x = fields[0].parse::<f64>().map_err(|_| err_at(line, "bad x coordinate"))?;
        let y = fields[1].parse::<f64>().map_err(|_| err_at(line, "bad y coordinate"))?;
        vertices.push(Vec2::new(x, y));
        vertex_lines.push(line);
    }

    let (line, content) =
        lines.next_content().ok_or(err_at(line, "missing 'triangles' section"))?;
    let n_triangles = parse_count(line, content, "triangles")?;
    let mut triangles = Vec::with_capacity(n_triangles);
    let mut triangle_lines = Vec::with_capacity(n_triangles);
    for k in 0..n_triangles {
        let (line, content) =
            lines.next_content().ok_or(err_at(line, format!("missing triangle {k}")))?;
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(err_at(line, "expected 'i j k region'"));
        }
        let mut idx = [0usize; 3];
        for (slot, f) in idx.iter_mut().zip(&fields[..3]) {
            *slot = f.parse().map_err(|_| err_at(line, "bad vertex index"))?;
        }
        let region_id: u8 = fields[3].parse().map_err(|_| err_at(line, "bad region id"))?;
        let region = Region::from_id(region_id)
            .ok_or_else(|| err_at(line, format!("unknown region id {region_id}")))?;
        triangles.push(Triangle { vertices: idx, region });
        triangle_lines.push(line);
    }

    let (line, content) = lines.next_content().ok_or(err_at(line, "missing 'bedges' section"))?;
    let n_bedges = parse_count(line, content, "bedges")?;
    let mut boundary_edges = Vec::with_capacity(n_bedges);
    let mut bedge_lines = Vec::with_capacity(n_bedges);
    for k in 0..n_bedges {
        let (line, content) =
            lines.next_content().ok_or(err_at(line, format!("missing boundary edge {k}")))?;
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(err_at(line, "expected 'i j marker'"));
        }
        let i: usize = fields[0].parse().map_err(|_| err_at(line, "bad vertex index"))?;
        let j: usize = fields[1].parse().map_err(|_| err_at(line, "bad vertex index"))?;
        let marker = match fields[2] {
            "dirA" => BoundaryMarker::DirichletA,
            "dirB" => BoundaryMarker::DirichletB,
            "neu" => BoundaryMarker::Neumann,
            other => return Err(err_at(line, format!("unknown marker '{other}'"))),
        };
        boundary_edges.push(BoundaryEdge { vertices: [i, j], marker });
        bedge_lines.push(line);
    }

    let (line, content) = lines.next_content().ok_or(err_at(line, "missing 'iedges' section"))?;
    let n_iedges = parse_count(line, content, "iedges")?;
    let mut interface_edges = Vec::with_capacity(n_iedges);
    let mut iedge_lines = Vec::with_capacity(n_iedges);
    for k in 0..n_iedges {
        let (line, content) =
            lines.next_content().ok_or(err_at(line, format!("missing interface edge {k}")))?;
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(err_at(line, "expected 'i j tri1 tri2'"));
        }
        let mut nums = [0usize; 4];
        for (slot, f) in nums.iter_mut().zip(&fields) {
            *slot = f.parse().map_err(|_| err_at(line, "bad index"))?;
        }
        interface_edges.push(InterfaceEdge {
            vertices: [nums[0], nums[1]],
            tri_omega1: nums[2],
            tri_omega2: nums[3],
        });
        iedge_lines.push(line);
    }

    if let Some((line, content)) = lines.next_content() {
        return Err(err_at(line, format!("unexpected trailing content '{content}'")));
    }

    InterfaceMesh::new(vertices, triangles, boundary_edges, interface_edges).map_err(|e| {
        let line = match &e {
            MeshError::NonFiniteCoordinate { vertex } => vertex_lines.get(*vertex).copied(),
            MeshError::DegenerateTriangle { triangle }
            | MeshError::NonPositiveArea { triangle } => triangle_lines.get(*triangle).copied(),
            MeshError::VertexOutOfRange { entity, index } => match *entity {
                "triangle" => triangle_lines.get(*index).copied(),
                "boundary edge" => bedge_lines.get(*index).copied(),
                "interface edge" => iedge_lines.get(*index).copied(),
                _ => None,
            },
            MeshError::DegenerateEdge { entity, index } => match *entity {
                "interface edge" => iedge_lines.get(*index).copied(),
                _ => bedge_lines.get(*index).copied(),
            },
            MeshError::InterfaceOrientation { edge }
            | MeshError::DuplicateInterfaceEdge { edge } => iedge_lines.get(*edge).copied(),
            MeshError::BoundaryEdgeNotOnBoundary { edge }
            | MeshError::DuplicateBoundaryEdge { edge }
            | MeshError::DirichletOnWrongRegion { edge } => bedge_lines.get(*edge).copied(),
            _ => None,
        };
        MeshIoError { line, message: e.to_string() }
    })
}

pub fn format_mesh(mesh: &InterfaceMesh) -> String {
    let mut out = String::new();
    out.push_str("oimesh 1\n");
    out.push_str(&format!("vertices {}\n", mesh.vertices().len()));
    for v in mesh.vertices() {
        // Shortest-roundtrip formatting: read(write(m)) recovers the bits.
        out.push_str(&format!("{} {}\n", v.x, v.y));
    }
    out.push_str(&format!("triangles {}\n", mesh.triangles().len()));
    for t in mesh.triangles() {
        let [a, b, c] = t.vertices;
        out.push_str(&format!("{a} {b} {c} {}\n", t.region.id()));
    }
    out.push_str(&format!("bedges {}\n", mesh.boundary_edges().len()));
    for e in mesh.boundary_edges() {
        let marker = match e.marker {
            BoundaryMarker::DirichletA => "dirA",
            BoundaryMarker::DirichletB => "dirB",
            BoundaryMarker::Neumann => "neu",
        };
        out.push_str(&format!("{} {} {marker}\n", e.vertices[0], e.vertices[1]));
    }
    out.push_str(&format!("iedges {}\n", mesh.interface_edges().len()));
    for e in mesh.interface_edges() {
        out.push_str(&format!(
            "{} {} {} {}\n",
            e.vertices[0], e.vertices[1], e.tri_omega1, e.tri_omega2
        ));
    }
    out
}

pub fn read_mesh(path: &Path) -> Result<InterfaceMesh, MeshIoError> {
    let text = std::fs::read_to_string(path).map_err(|e| MeshIoError {
        line: None,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse_mesh(&text)
}

pub fn write_mesh(mesh: &InterfaceMesh, path: &Path) -> Result<(), MeshIoError> {
    std::fs::write(path, format_mesh(mesh)).map_err(|e| MeshIoError {
        line: None,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn structurally_equal(a: &InterfaceMesh, b: &InterfaceMesh) -> bool {
        a.vertices() == b.vertices()
            && a.triangles() == b.triangles()
            && a.boundary_edges() == b.boundary_edges()
            && a.interface_edges() == b.interface_edges()
    }

    #[test]
    fn roundtrip_of_the_unit_slab() {
        let mesh = InterfaceMesh::generate_slab(1, 1, 1.0, 1.0, 1.0).unwrap();
        let text = format_mesh(&mesh);
        let back = parse_mesh(&text).unwrap();
        assert!(structurally_equal(&mesh, &back));
    }

    #[test]
    fn roundtrip_survives_awkward_coordinates() {
        let mesh = InterfaceMesh::generate_slab(3, 2, 0.7, 1.9, 0.3).unwrap();
        let back = parse_mesh(&format_mesh(&mesh)).unwrap();
        assert!(structurally_equal(&mesh, &back));
    }

    #[test]
    fn reports_unknown_marker_with_line_number() {
        let mesh = InterfaceMesh::generate_slab(1, 1, 1.0, 1.0, 1.0).unwrap();
        let text = format_mesh(&mesh).replace("dirB", "dirX");
        let err = parse_mesh(&text).unwrap_err();
        assert!(err.message.contains("unknown marker"));
        assert!(err.line.is_some());
    }

    #[test]
    fn reports_interface_orientation_with_line_number() {
        let mesh = InterfaceMesh::generate_slab(1, 1, 1.0, 1.0, 1.0).unwrap();
        let mut text = format_mesh(&mesh);
        // Swap the two incident triangles of the first interface edge.
        let edge = mesh.interface_edges()[0];
        let good = format!(
            "{} {} {} {}",
            edge.vertices[0], edge.vertices[1], edge.tri_omega1, edge.tri_omega2
        );
        let bad = format!(
            "{} {} {} {}",
            edge.vertices[0], edge.vertices[1], edge.tri_omega2, edge.tri_omega1
        );
        text = text.replace(&good, &bad);
        let err = parse_mesh(&text).unwrap_err();
        assert!(err.message.contains("interface orientation"), "{}", err.message);
        assert!(err.line.is_some());
    }

    #[test]
    fn reports_missing_dirichlet_component() {
        let mesh = InterfaceMesh::generate_slab(1, 1, 1.0, 1.0, 1.0).unwrap();
        let text = format_mesh(&mesh).replace("dirB", "neu");
        let err = parse_mesh(&text).unwrap_err();
        assert!(err.message.contains("missing Dirichlet component"), "{}", err.message);
    }

    #[test]
    fn rejects_malformed_headers_and_counts() {
        assert!(parse_mesh("").is_err());
        assert!(parse_mesh("oimesh 2\n").is_err());
        assert!(parse_mesh("oimesh 1\nvertices nope\n").is_err());
        let err = parse_mesh("oimesh 1\nvertices 1\n0.0\n").unwrap_err();
        assert_eq!(err.line, Some(3));
    }
}
