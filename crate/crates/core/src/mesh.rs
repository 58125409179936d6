//! Interface-aware triangulations.
//!
//! A mesh carries region tags (1 or 2) on every triangle, markers on the
//! outer boundary (two separated Dirichlet components plus a Neumann rest),
//! and an explicit list of oriented interface edges, each shared by exactly
//! one region-1 and one region-2 triangle. The interface normal always
//! points from region 1 into region 2.
//!
//! Construction validates the full invariant set; readers in the companion
//! crate parse first and then funnel through [`InterfaceMesh::new`], so file
//! input cannot bypass validation.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::vec2::Vec2;

/// The two subdomains separated by the interface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Region {
    Omega1,
    Omega2,
}

impl Region {
    pub fn id(self) -> u8 {
        match self {
            Region::Omega1 => 1,
            Region::Omega2 => 2,
        }
    }

    pub fn from_id(id: u8) -> Option<Region> {
        match id {
            1 => Some(Region::Omega1),
            2 => Some(Region::Omega2),
            _ => None,
        }
    }
}

/// Outer-boundary markers. The two Dirichlet components touch region 1 and
/// region 2 respectively; everything else is a zero-flux Neumann boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryMarker {
    DirichletA,
    DirichletB,
    Neumann,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Triangle {
    pub vertices: [usize; 3],
    pub region: Region,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub marker: BoundaryMarker,
}

/// One interface segment with its two incident triangles, region 1 first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InterfaceEdge {
    pub vertices: [usize; 2],
    pub tri_omega1: usize,
    pub tri_omega2: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MeshError {
    VertexOutOfRange { entity: &'static str, index: usize },
    NonFiniteCoordinate { vertex: usize },
    DegenerateTriangle { triangle: usize },
    /// Signed area is not positive: wrong winding or zero area.
    NonPositiveArea { triangle: usize },
    DegenerateEdge { entity: &'static str, index: usize },
    /// Interface edge not shared by exactly one region-1 and one region-2
    /// triangle, or the stored incidences disagree with the triangulation.
    InterfaceOrientation { edge: usize },
    DuplicateInterfaceEdge { edge: usize },
    /// A triangle edge joins the two regions without being listed on the
    /// interface; the regions would leak into each other.
    RegionsNotSeparated { vertices: [usize; 2] },
    BoundaryEdgeNotOnBoundary { edge: usize },
    UnmarkedBoundaryEdge { vertices: [usize; 2] },
    DuplicateBoundaryEdge { edge: usize },
    MissingDirichletComponent { marker: BoundaryMarker },
    /// A Dirichlet component touches the wrong region.
    DirichletOnWrongRegion { edge: usize },
    RegionNotEdgeConnected { region: Region },
    InterfaceNotConnected,
    InvalidDimension { what: &'static str },
}

impl core::fmt::Display for MeshError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            MeshError::VertexOutOfRange { entity, index } => {
                write!(f, "{entity} {index} references a vertex out of range")
            }
            MeshError::NonFiniteCoordinate { vertex } => {
                write!(f, "vertex {vertex} has a non-finite coordinate")
            }
            MeshError::DegenerateTriangle { triangle } => {
                write!(f, "triangle {triangle} repeats a vertex")
            }
            MeshError::NonPositiveArea { triangle } => {
                write!(f, "triangle {triangle} has non-positive signed area")
            }
            MeshError::DegenerateEdge { entity, index } => {
                write!(f, "{entity} {index} has zero length")
            }
            MeshError::InterfaceOrientation { edge } => {
                write!(
                    f,
                    "interface orientation: edge {edge} is not shared by one region-1 and one region-2 triangle"
                )
            }
            MeshError::DuplicateInterfaceEdge { edge } => {
                write!(f, "interface edge {edge} duplicates an earlier edge")
            }
            MeshError::RegionsNotSeparated { vertices } => {
                write!(
                    f,
                    "edge ({}, {}) joins both regions but is not an interface edge",
                    vertices[0], vertices[1]
                )
            }
            MeshError::BoundaryEdgeNotOnBoundary { edge } => {
                write!(f, "boundary edge {edge} is not on the mesh boundary")
            }
            MeshError::UnmarkedBoundaryEdge { vertices } => {
                write!(f, "boundary edge ({}, {}) carries no marker", vertices[0], vertices[1])
            }
            MeshError::DuplicateBoundaryEdge { edge } => {
                write!(f, "boundary edge {edge} duplicates an earlier edge")
            }
            MeshError::MissingDirichletComponent { marker } => {
                write!(f, "missing Dirichlet component {marker:?}")
            }
            MeshError::DirichletOnWrongRegion { edge } => {
                write!(f, "Dirichlet edge {edge} touches the wrong region")
            }
            MeshError::RegionNotEdgeConnected { region } => {
                write!(f, "{region:?} is not edge-connected")
            }
            MeshError::InterfaceNotConnected => write!(f, "interface is not connected"),
            MeshError::InvalidDimension { what } => write!(f, "invalid dimension: {what}"),
        }
    }
}

impl core::error::Error for MeshError {}

/// A validated two-region triangulation with oriented interface edges.
#[derive(Clone, Debug)]
pub struct InterfaceMesh {
    vertices: Vec<Vec2>,
    triangles: Vec<Triangle>,
    boundary_edges: Vec<BoundaryEdge>,
    interface_edges: Vec<InterfaceEdge>,
    /// Incident triangle of each boundary edge, resolved during validation.
    boundary_edge_triangle: Vec<usize>,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl InterfaceMesh {
    /// Builds a mesh and validates every structural invariant: positive
    /// areas, interface edges shared by exactly one triangle per region,
    /// region separation (every mixed-region edge lies on the interface,
    /// which together with the marker checks makes the interface separate
    /// the two Dirichlet components), marked-boundary coverage, nonempty
    /// Dirichlet components on the right regions, edge-connected regions
    /// and a connected interface.
    pub fn new(
        vertices: Vec<Vec2>,
        triangles: Vec<Triangle>,
        boundary_edges: Vec<BoundaryEdge>,
        interface_edges: Vec<InterfaceEdge>,
    ) -> Result<Self, MeshError> {
        let nv = vertices.len();
        for (v, p) in vertices.iter().enumerate() {
            if !p.is_finite() {
                return Err(MeshError::NonFiniteCoordinate { vertex: v });
            }
        }

        for (t, tri) in triangles.iter().enumerate() {
            let [a, b, c] = tri.vertices;
            if a >= nv || b >= nv || c >= nv {
                return Err(MeshError::VertexOutOfRange { entity: "triangle", index: t });
            }
            if a == b || b == c || a == c {
                return Err(MeshError::DegenerateTriangle { triangle: t });
            }
            let signed = (vertices[b] - vertices[a]).cross(vertices[c] - vertices[a]);
            if !(signed > 0.0) {
                return Err(MeshError::NonPositiveArea { triangle: t });
            }
        }

        // Edge incidence map over the triangulation.
        let mut incidence: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            let [a, b, c] = tri.vertices;
            for (p, q) in [(a, b), (b, c), (c, a)] {
                incidence.entry(edge_key(p, q)).or_default().push(t);
            }
        }

        // Interface edges: exactly one triangle per region, stored
        // incidences consistent with the triangulation.
        let mut interface_keys: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (e, edge) in interface_edges.iter().enumerate() {
            let [a, b] = edge.vertices;
            if a >= nv || b >= nv {
                return Err(MeshError::VertexOutOfRange { entity: "interface edge", index: e });
            }
            if a == b || (vertices[a] - vertices[b]).norm() == 0.0 {
                return Err(MeshError::DegenerateEdge { entity: "interface edge", index: e });
            }
            if interface_keys.insert(edge_key(a, b), e).is_some() {
                return Err(MeshError::DuplicateInterfaceEdge { edge: e });
            }
            let incident = incidence.get(&edge_key(a, b)).map(Vec::as_slice).unwrap_or(&[]);
            if incident.len() != 2 {
                return Err(MeshError::InterfaceOrientation { edge: e });
            }
            let (t0, t1) = (incident[0], incident[1]);
            let (om1, om2) = match (triangles[t0].region, triangles[t1].region) {
                (Region::Omega1, Region::Omega2) => (t0, t1),
                (Region::Omega2, Region::Omega1) => (t1, t0),
                _ => return Err(MeshError::InterfaceOrientation { edge: e }),
            };
            if edge.tri_omega1 != om1 || edge.tri_omega2 != om2 {
                return Err(MeshError::InterfaceOrientation { edge: e });
            }
        }

        // Region separation: a shared edge with mixed regions must be an
        // interface edge. Any path between the regions therefore crosses the
        // interface, which with the marker checks below keeps the two
        // Dirichlet components on opposite sides.
        for (key, tris) in &incidence {
            if tris.len() == 2
                && triangles[tris[0]].region != triangles[tris[1]].region
                && !interface_keys.contains_key(key)
            {
                return Err(MeshError::RegionsNotSeparated { vertices: [key.0, key.1] });
            }
        }

        // Boundary coverage: listed edges must be true boundary edges, each
        // exactly once, and every boundary edge must be listed.
        let mut marked: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut boundary_edge_triangle = Vec::with_capacity(boundary_edges.len());
        let mut has_dir_a = false;
        let mut has_dir_b = false;
        for (e, edge) in boundary_edges.iter().enumerate() {
            let [a, b] = edge.vertices;
            if a >= nv || b >= nv {
                return Err(MeshError::VertexOutOfRange { entity: "boundary edge", index: e });
            }
            let incident = incidence.get(&edge_key(a, b)).map(Vec::as_slice).unwrap_or(&[]);
            if incident.len() != 1 {
                return Err(MeshError::BoundaryEdgeNotOnBoundary { edge: e });
            }
            if marked.insert(edge_key(a, b), e).is_some() {
                return Err(MeshError::DuplicateBoundaryEdge { edge: e });
            }
            boundary_edge_triangle.push(incident[0]);
            let region = triangles[incident[0]].region;
            match edge.marker {
                BoundaryMarker::DirichletA => {
                    if region != Region::Omega1 {
                        return Err(MeshError::DirichletOnWrongRegion { edge: e });
                    }
                    has_dir_a = true;
                }
                BoundaryMarker::DirichletB => {
                    if region != Region::Omega2 {
                        return Err(MeshError::DirichletOnWrongRegion { edge: e });
                    }
                    has_dir_b = true;
                }
                BoundaryMarker::Neumann => {}
            }
        }
        if !has_dir_a {
            return Err(MeshError::MissingDirichletComponent { marker: BoundaryMarker::DirichletA });
        }
        if !has_dir_b {
            return Err(MeshError::MissingDirichletComponent { marker: BoundaryMarker::DirichletB });
        }
        for (key, tris) in &incidence {
            if tris.len() == 1 && !marked.contains_key(key) {
                return Err(MeshError::UnmarkedBoundaryEdge { vertices: [key.0, key.1] });
            }
        }

        // Edge-connectivity of each region.
        for region in [Region::Omega1, Region::Omega2] {
            let members: Vec<usize> =
                (0..triangles.len()).filter(|&t| triangles[t].region == region).collect();
            if members.is_empty() {
                return Err(MeshError::RegionNotEdgeConnected { region });
            }
            let mut seen = vec![false; triangles.len()];
            let mut queue = VecDeque::new();
            seen[members[0]] = true;
            queue.push_back(members[0]);
            let mut reached = 1usize;
            while let Some(t) = queue.pop_front() {
                let [a, b, c] = triangles[t].vertices;
                for (p, q) in [(a, b), (b, c), (c, a)] {
                    for &u in &incidence[&edge_key(p, q)] {
                        if !seen[u] && triangles[u].region == region {
                            seen[u] = true;
                            reached += 1;
                            queue.push_back(u);
                        }
                    }
                }
            }
            if reached != members.len() {
                return Err(MeshError::RegionNotEdgeConnected { region });
            }
        }

        // Interface connectivity through shared vertices.
        if !interface_edges.is_empty() {
            let mut vertex_edges: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for (e, edge) in interface_edges.iter().enumerate() {
                vertex_edges.entry(edge.vertices[0]).or_default().push(e);
                vertex_edges.entry(edge.vertices[1]).or_default().push(e);
            }
            let mut seen = vec![false; interface_edges.len()];
            let mut queue = VecDeque::new();
            seen[0] = true;
            queue.push_back(0usize);
            let mut reached = 1usize;
            while let Some(e) = queue.pop_front() {
                for v in interface_edges[e].vertices {
                    for &u in &vertex_edges[&v] {
                        if !seen[u] {
                            seen[u] = true;
                            reached += 1;
                            queue.push_back(u);
                        }
                    }
                }
            }
            if reached != interface_edges.len() {
                return Err(MeshError::InterfaceNotConnected);
            }
        }

        Ok(InterfaceMesh {
            vertices,
            triangles,
            boundary_edges,
            interface_edges,
            boundary_edge_triangle,
        })
    }

    /// Structured test geometry: the rectangle
    /// `(0, length_1 + length_2) × (0, height)` with a vertical interface at
    /// `x = length_1`, `nx` cells per region horizontally and `ny` cells
    /// vertically. Each cell splits into four triangles through the
    /// midpoints of its vertical edges, so every vertical mesh line (the
    /// interface included) carries `2·ny` segments. The left boundary is
    /// Dirichlet A, the right Dirichlet B, top and bottom Neumann.
    pub fn generate_slab(
        nx: usize,
        ny: usize,
        length_1: f64,
        length_2: f64,
        height: f64,
    ) -> Result<Self, MeshError> {
        if nx == 0 || ny == 0 {
            return Err(MeshError::InvalidDimension { what: "cell counts must be at least 1" });
        }
        if !(length_1 > 0.0) || !(length_2 > 0.0) || !(height > 0.0) {
            return Err(MeshError::InvalidDimension { what: "side lengths must be positive" });
        }

        let cols = 2 * nx + 1;
        let rows = 2 * ny + 1;
        let x_of = |i: usize| -> f64 {
            if i <= nx {
                if i == nx {
                    length_1
                } else {
                    length_1 * i as f64 / nx as f64
                }
            } else if i == 2 * nx {
                length_1 + length_2
            } else {
                length_1 + length_2 * (i - nx) as f64 / nx as f64
            }
        };
        let y_of = |k: usize| -> f64 {
            if k == 2 * ny {
                height
            } else {
                height * k as f64 / (2 * ny) as f64
            }
        };
        let v = |i: usize, k: usize| -> usize { i * rows + k };

        let mut vertices = Vec::with_capacity(cols * rows);
        for i in 0..cols {
            for k in 0..rows {
                vertices.push(Vec2::new(x_of(i), y_of(k)));
            }
        }

        let mut triangles = Vec::with_capacity(8 * nx * ny);
        for i in 0..2 * nx {
            let region = if i < nx { Region::Omega1 } else { Region::Omega2 };
            for j in 0..ny {
                let (bl, ml, tl) = (v(i, 2 * j), v(i, 2 * j + 1), v(i, 2 * j + 2));
                let (br, mr, tr) = (v(i + 1, 2 * j), v(i + 1, 2 * j + 1), v(i + 1, 2 * j + 2));
                triangles.push(Triangle { vertices: [bl, br, mr], region });
                triangles.push(Triangle { vertices: [bl, mr, ml], region });
                triangles.push(Triangle { vertices: [ml, mr, tr], region });
                triangles.push(Triangle { vertices: [ml, tr, tl], region });
            }
        }

        let mut interface_edges = Vec::with_capacity(2 * ny);
        for k in 0..2 * ny {
            let j = k / 2;
            let left_base = 4 * ((nx - 1) * ny + j);
            let right_base = 4 * (nx * ny + j);
            let (tri_omega1, tri_omega2) = if k % 2 == 0 {
                (left_base, right_base + 1)
            } else {
                (left_base + 2, right_base + 3)
            };
            interface_edges.push(InterfaceEdge {
                vertices: [v(nx, k), v(nx, k + 1)],
                tri_omega1,
                tri_omega2,
            });
        }

        let mut boundary_edges = Vec::with_capacity(4 * ny + 4 * nx);
        for k in 0..2 * ny {
            boundary_edges.push(BoundaryEdge {
                vertices: [v(0, k), v(0, k + 1)],
                marker: BoundaryMarker::DirichletA,
            });
        }
        for k in 0..2 * ny {
            boundary_edges.push(BoundaryEdge {
                vertices: [v(2 * nx, k), v(2 * nx, k + 1)],
                marker: BoundaryMarker::DirichletB,
            });
        }
        for i in 0..2 * nx {
            boundary_edges.push(BoundaryEdge {
                vertices: [v(i, 0), v(i + 1, 0)],
                marker: BoundaryMarker::Neumann,
            });
        }
        for i in 0..2 * nx {
            boundary_edges.push(BoundaryEdge {
                vertices: [v(i, 2 * ny), v(i + 1, 2 * ny)],
                marker: BoundaryMarker::Neumann,
            });
        }

        Self::new(vertices, triangles, boundary_edges, interface_edges)
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn interface_edges(&self) -> &[InterfaceEdge] {
        &self.interface_edges
    }

    /// Incident triangle of a boundary edge.
    pub fn boundary_edge_triangle(&self, edge: usize) -> usize {
        self.boundary_edge_triangle[edge]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].vertices;
        0.5 * (self.vertices[b] - self.vertices[a]).cross(self.vertices[c] - self.vertices[a])
    }

    pub fn triangle_corners(&self, t: usize) -> [Vec2; 3] {
        let [a, b, c] = self.triangles[t].vertices;
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn interface_edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.interface_edges[e].vertices;
        (self.vertices[b] - self.vertices[a]).norm()
    }

    /// Unit normal of an interface edge, oriented from region 1 into
    /// region 2.
    pub fn interface_normal(&self, e: usize) -> Vec2 {
        let edge = self.interface_edges[e];
        let [a, b] = edge.vertices;
        let tangent = self.vertices[b] - self.vertices[a];
        let n = Vec2::new(tangent.y, -tangent.x) * (1.0 / tangent.norm());
        let towards =
            self.triangle_centroid(edge.tri_omega2) - self.triangle_centroid(edge.tri_omega1);
        if n.dot(towards) < 0.0 {
            -n
        } else {
            n
        }
    }

    fn triangle_centroid(&self, t: usize) -> Vec2 {
        let [a, b, c] = self.triangle_corners(t);
        (a + b + c) * (1.0 / 3.0)
    }

    /// Sorted list of vertices lying on the interface.
    pub fn interface_vertices(&self) -> Vec<usize> {
        let mut out: Vec<usize> =
            self.interface_edges.iter().flat_map(|e| e.vertices.into_iter()).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Which regions each vertex touches, `[region 1, region 2]`.
    pub fn vertex_regions(&self) -> Vec<[bool; 2]> {
        let mut out = vec![[false; 2]; self.vertices.len()];
        for tri in &self.triangles {
            let slot = match tri.region {
                Region::Omega1 => 0,
                Region::Omega2 => 1,
            };
            for v in tri.vertices {
                out[v][slot] = true;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_slab_counts_and_normals() {
        let mesh = InterfaceMesh::generate_slab(1, 1, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(mesh.vertices().len(), 9);
        assert_eq!(mesh.triangles().len(), 8);
        assert_eq!(mesh.interface_edges().len(), 2);
        assert_eq!(mesh.boundary_edges().len(), 8);
        for e in 0..mesh.interface_edges().len() {
            let n = mesh.interface_normal(e);
            assert!((n.norm() - 1.0).abs() < 1e-14);
            assert!((n.x - 1.0).abs() < 1e-14 && n.y.abs() < 1e-14);
        }
    }

    #[test]
    fn interface_edge_count_is_twice_ny() {
        let mesh = InterfaceMesh::generate_slab(4, 2, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(mesh.interface_edges().len(), 4);
        assert_eq!(mesh.triangles().len(), 8 * 4 * 2);
    }

    #[test]
    fn slab_areas_partition_the_rectangle() {
        for (nx, ny, l1, l2, h) in
            [(1, 1, 1.0, 1.0, 1.0), (3, 2, 0.7, 1.9, 0.5), (8, 8, 1.0, 1.0, 1.0)]
        {
            let mesh = InterfaceMesh::generate_slab(nx, ny, l1, l2, h).unwrap();
            let total: f64 = (0..mesh.triangles().len()).map(|t| mesh.triangle_area(t)).sum();
            assert!((total - (l1 + l2) * h).abs() < 1e-12, "{total}");
        }
    }

    #[test]
    fn slab_euler_formula() {
        // V − E + F = 2 with the outer face; E enumerated from the
        // triangulation matches the closed form E = V + T − 1.
        let (nx, ny) = (4usize, 2usize);
        let mesh = InterfaceMesh::generate_slab(nx, ny, 1.0, 1.0, 1.0).unwrap();
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for tri in mesh.triangles() {
            let [a, b, c] = tri.vertices;
            for (p, q) in [(a, b), (b, c), (c, a)] {
                edges.push(edge_key(p, q));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let v = (2 * nx + 1) * (2 * ny + 1);
        let t = 8 * nx * ny;
        assert_eq!(mesh.vertices().len(), v);
        assert_eq!(edges.len(), v + t - 1);
    }

    #[test]
    fn slab_rejects_degenerate_dimensions() {
        assert!(InterfaceMesh::generate_slab(0, 1, 1.0, 1.0, 1.0).is_err());
        assert!(InterfaceMesh::generate_slab(1, 1, 0.0, 1.0, 1.0).is_err());
        assert!(InterfaceMesh::generate_slab(1, 1, 1.0, -2.0, 1.0).is_err());
        assert!(InterfaceMesh::generate_slab(1, 1, 1.0, 1.0, 0.0).is_err());
    }

    fn unit_slab_parts() -> (Vec<Vec2>, Vec<Triangle>, Vec<BoundaryEdge>, Vec<InterfaceEdge>) {
        let m = InterfaceMesh::generate_slab(1, 1, 1.0, 1.0, 1.0).unwrap();
        (
            m.vertices().to_vec(),
            m.triangles().to_vec(),
            m.boundary_edges().to_vec(),
            m.interface_edges().to_vec(),
        )
    }

    #[test]
    fn rejects_interface_edge_inside_one_region() {
        let (vs, mut tris, bes, ies) = unit_slab_parts();
        // Flip the region of the triangle on the region-2 side of the first
        // interface edge; the edge is then bordered by two region-1
        // triangles.
        tris[ies[0].tri_omega2].region = Region::Omega1;
        let err = InterfaceMesh::new(vs, tris, bes, ies).unwrap_err();
        assert!(matches!(err, MeshError::InterfaceOrientation { edge: 0 }));
    }

    #[test]
    fn rejects_missing_dirichlet_component() {
        let (vs, tris, mut bes, ies) = unit_slab_parts();
        for be in bes.iter_mut() {
            if be.marker == BoundaryMarker::DirichletB {
                be.marker = BoundaryMarker::Neumann;
            }
        }
        assert!(matches!(
            InterfaceMesh::new(vs, tris, bes, ies),
            Err(MeshError::MissingDirichletComponent { marker: BoundaryMarker::DirichletB })
        ));
    }

    #[test]
    fn rejects_region_leak() {
        let (vs, tris, bes, mut ies) = unit_slab_parts();
        // Dropping one interface edge leaves a mixed-region shared edge
        // unlisted.
        ies.pop();
        assert!(matches!(
            InterfaceMesh::new(vs, tris, bes, ies),
            Err(MeshError::RegionsNotSeparated { .. })
        ));
    }

    #[test]
    fn rejects_unmarked_boundary() {
        let (vs, tris, mut bes, ies) = unit_slab_parts();
        let k = bes.iter().position(|b| b.marker == BoundaryMarker::Neumann).unwrap();
        bes.remove(k);
        assert!(matches!(
            InterfaceMesh::new(vs, tris, bes, ies),
            Err(MeshError::UnmarkedBoundaryEdge { .. })
        ));
    }

    #[test]
    fn rejects_flipped_winding() {
        let (vs, mut tris, bes, ies) = unit_slab_parts();
        tris[3].vertices.swap(0, 1);
        assert!(matches!(
            InterfaceMesh::new(vs, tris, bes, ies),
            Err(MeshError::NonPositiveArea { triangle: 3 })
        ));
    }

    #[test]
    fn vertex_regions_mark_interface_vertices_twice() {
        let mesh = InterfaceMesh::generate_slab(2, 2, 1.0, 1.0, 1.0).unwrap();
        let regions = mesh.vertex_regions();
        for v in mesh.interface_vertices() {
            assert_eq!(regions[v], [true, true]);
        }
        let both = regions.iter().filter(|r| r[0] && r[1]).count();
        assert_eq!(both, mesh.interface_vertices().len());
    }
}
