//! Generate the three built-in meshes, write them in the text format, read
//! them back and refine once.
//!
//! ```text
//! cargo run --release --example mesh_io -- /tmp/meshes
//! ```

use cip_transport::mesh::{export_mesh, import_mesh};
use cip_transport::scenarios::Domain;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().join("cip_meshes").display().to_string());
    std::fs::create_dir_all(&dir)?;
    for (name, domain, nele) in [("disc", Domain::Disc, 40), ("square", Domain::Square, 10), ("periodic", Domain::PeriodicSquare, 10)] {
        let mesh = domain.mesh(nele)?;
        let path = std::path::Path::new(&dir).join(format!("{name}_{nele}.txt"));
        export_mesh(&mesh, &path)?;
        let back = import_mesh(&path)?;
        assert_eq!(back.triangles, mesh.triangles);
        let (fine, _) = back.refine_uniform()?;
        println!(
            "{name:>8}: {} vertices, {} triangles, h = {:.4}, shape {:.2}; refined: {} triangles, h = {:.4}",
            back.n_vertices(),
            back.n_triangles(),
            back.h,
            back.shape_regularity(),
            fine.n_triangles(),
            fine.h
        );
    }
    println!("written to {dir}");
    Ok(())
}
