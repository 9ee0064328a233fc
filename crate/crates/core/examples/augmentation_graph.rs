//! Builds the augmentation graph of a six-point population and prints its
//! normalized adjacency and degrees.

use spectral_ncd::population::{build_adjacency, PopulationSpec};

fn main() -> spectral_ncd::Result<()> {
    let spec = PopulationSpec::from_json(include_str!("configs/pets.json"))?;
    let g = build_adjacency(&spec)?;
    println!("{} points, {} labeled", g.n(), g.n_labeled);
    for x in 0..g.n() {
        println!("{:>6}  degree {:.4}", spec.point_id(x), g.degrees[x]);
    }
    println!("normalized adjacency:{:.4}", g.normalized);
    Ok(())
}
