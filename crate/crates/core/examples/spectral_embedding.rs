//! Top-k eigenvectors of the normalized adjacency for every k.

use spectral_ncd::population::{build_adjacency, PopulationSpec};
use spectral_ncd::spectral::decompose;

fn main() -> spectral_ncd::Result<()> {
    let spec = PopulationSpec::from_json(include_str!("configs/pets.json"))?;
    let g = build_adjacency(&spec)?;
    let emb = decompose(&g, 2)?;
    println!("eigenvalues: {:.6}", emb.eigenvalues.transpose());
    println!("U* (unlabeled rows, k = 2):{:.4}", emb.u_top());
    for k in 1..=g.n() {
        let e = emb.with_k(k)?;
        println!(
            "k = {k}: eigengap {:.4}, tail energy {:.3e}{}",
            e.eigengap,
            e.tail_energy(),
            if e.degenerate_gap { " (degenerate)" } else { "" }
        );
    }
    Ok(())
}
