//! Residual against the extra-knowledge projection bound, with the
//! solvability condition, on a few random graphs.

use rand::Rng;
use spectral_ncd::bounds::{theorem4_analysis, theorem4_condition};
use spectral_ncd::spectral::SpectralEmbedding;
use spectral_ncd::synth::{instance_rng, random_binary, random_graph};

fn main() -> spectral_ncd::Result<()> {
    for i in 0..8 {
        let mut rng = instance_rng(11, i);
        let g = random_graph(&mut rng, 8, 3);
        let k = rng.gen_range(1..=6);
        let emb = SpectralEmbedding::from_symmetric(&g.normalized, 3, k)?;
        let y = random_binary(&mut rng, 5);
        let kd = theorem4_analysis(&emb, &y)?;
        let c = theorem4_condition(&emb, &g.normalized, &y)?;
        println!(
            "k = {k}: residual {:.4} <= bound {:.4}, ignorance {:.3}, condition {:?}",
            kd.residual, kd.theorem4_bound, kd.ignorance_degree, c.verdict
        );
    }
    Ok(())
}
