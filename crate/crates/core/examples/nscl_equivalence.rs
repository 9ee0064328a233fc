//! Minimizes the contrastive objective by gradient descent and compares the
//! minimizer with the spectral embedding.

use spectral_ncd::nscl::{equivalence_certificate, minimize_nscl};
use spectral_ncd::population::PopulationSpec;

fn main() -> spectral_ncd::Result<()> {
    let spec = PopulationSpec::from_json(include_str!("configs/pets.json"))?;
    for k in 1..=3 {
        let fit = minimize_nscl(&spec, k, 7, 20_000, 0.5)?;
        let cert = equivalence_certificate(&spec, &fit.features)?;
        let b = &fit.breakdown;
        println!(
            "k = {k}: loss {:.6} (L1..L5 = {:.4} {:.4} {:.4} {:.4} {:.4}) after {} iterations",
            b.total, b.l1, b.l2, b.l3, b.l4, b.l5, fit.iterations
        );
        println!(
            "       offset error {:.2e}, Gram error {:.2e}, optimality gap {:.2e}",
            cert.offset_error, cert.gram_error, cert.optimality_gap
        );
    }
    Ok(())
}
