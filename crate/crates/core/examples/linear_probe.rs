//! Least-squares probe of the novel classes on the spectral embedding.

use spectral_ncd::population::{build_adjacency, PopulationSpec};
use spectral_ncd::probe::{probe, LabelMatrix};
use spectral_ncd::spectral::decompose;

fn main() -> spectral_ncd::Result<()> {
    let spec = PopulationSpec::from_json(include_str!("configs/pets.json"))?;
    let g = build_adjacency(&spec)?;
    let labels = LabelMatrix::from_classes(&[0, 0, 1, 1], 2)?;
    for k in 1..=3 {
        let p = probe(&decompose(&g, k)?, &labels)?;
        println!(
            "k = {k}: residual {:.3e}, per class {:?}, misclassified {}",
            p.residual_total, p.residual_per_class, p.zero_one_error_ls
        );
    }
    Ok(())
}
