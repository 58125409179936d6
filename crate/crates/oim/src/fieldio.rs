//! Field export: `vertex_index,region,x,y,value` CSV, one row per vertex
//! per region it touches, so interface vertices appear twice with their two
//! one-sided values.

use std::path::Path;

use oim_core::mesh::Region;
use oim_core::space::BrokenField;

use crate::jsonout::format_float;

pub fn format_field_csv(field: &BrokenField) -> String {
    let space = field.space();
    let mesh = space.mesh();
    let touches = mesh.vertex_regions();
    let mut out = String::from("vertex_index,region,x,y,value\n");
    for (v, point) in mesh.vertices().iter().enumerate() {
        for (slot, region) in [(0, Region::Omega1), (1, Region::Omega2)] {
            if !touches[v][slot] {
                continue;
            }
            let value = field.coefficients()[space.dof(v, region)];
            out.push_str(&format!(
                "{v},{},{},{},{}\n",
                region.id(),
                format_float(point.x),
                format_float(point.y),
                format_float(value)
            ));
        }
    }
    out
}

pub fn write_field_csv(field: &BrokenField, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, format_field_csv(field))
}

#[cfg(test)]
mod tests {
    use super::*;
    use oim_core::mesh::InterfaceMesh;
    use oim_core::space::BrokenSpace;
    use std::sync::Arc;

    #[test]
    fn interface_vertices_appear_once_per_region() {
        let mesh = InterfaceMesh::generate_slab(1, 1, 1.0, 1.0, 1.0).unwrap();
        let space = BrokenSpace::new(Arc::new(mesh));
        let field = space.lift_dirichlet(0.0, 3.0);
        let csv = format_field_csv(&field);
        let rows: Vec<&str> = csv.lines().skip(1).collect();
        // 9 vertices, 3 of them on the interface.
        assert_eq!(rows.len(), 12);
        for v in space.mesh().interface_vertices() {
            let dupes = rows.iter().filter(|r| r.starts_with(&format!("{v},"))).count();
            assert_eq!(dupes, 2);
        }
        assert!(csv.starts_with("vertex_index,region,x,y,value\n"));
    }
}
