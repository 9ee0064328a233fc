//! K-means on the spectral embedding of the unlabeled points, scored with
//! the best matching of clusters to classes.

use spectral_ncd::population::{build_adjacency, PopulationSpec};
use spectral_ncd::probe::{cluster_accuracy, kmeans};
use spectral_ncd::spectral::decompose;

fn main() -> spectral_ncd::Result<()> {
    let spec = PopulationSpec::from_json(include_str!("configs/pets.json"))?;
    let g = build_adjacency(&spec)?;
    let truth = [0, 0, 1, 1];
    for k in 1..=3 {
        let u = decompose(&g, k)?.u_top();
        let km = kmeans(&u, 2, 3)?;
        let acc = cluster_accuracy(&u, &truth, 2, 3)?;
        println!("k = {k}: clusters {:?}, accuracy {acc:.2}", km.labels);
    }
    Ok(())
}
