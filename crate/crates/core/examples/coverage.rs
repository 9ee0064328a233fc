//! Coverage analysis on the block-averaged graph: κ, the residual identity,
//! and labels built so that every ω is equal.

use nalgebra::DVector;
use spectral_ncd::bounds::{coverage_analysis, lbar_structure_check, omega_ratio_diagnostics};
use spectral_ncd::population::{build_adjacency, build_approx, PopulationSpec};
use spectral_ncd::synth::{instance_rng, random_binary, random_block_approx};

fn main() -> spectral_ncd::Result<()> {
    let spec = PopulationSpec::from_json(include_str!("configs/pets.json"))?;
    let ap = build_approx(&build_adjacency(&spec)?)?;
    println!("‖Ȧ − Ā‖₂ = {:.4}", ap.perturbation_norm());
    let s = lbar_structure_check(&ap, 3)?;
    println!("structure: theta {}, holds {:?}", s.theta, s.holds);
    for y in [vec![1.0, 1.0, 0.0, 0.0], vec![1.0, 0.0, 1.0, 0.0]] {
        let y = DVector::from_vec(y);
        let c = coverage_analysis(&ap, 3, &y)?;
        println!(
            "y = {:?}: kappa {:.4}, residual {:.4e} = {:.4e}, omega {:.4?}",
            y.as_slice(),
            c.kappa,
            c.residual_approx,
            c.exact_identity_rhs,
            c.omega
        );
    }

    // a random averaged matrix with six unlabeled points and small η_u
    let mut rng = instance_rng(5, 0);
    let ap = random_block_approx(&mut rng, 2, 6, 50.0);
    let y = random_binary(&mut rng, 6);
    let c = coverage_analysis(&ap, 4, &y)?;
    println!(
        "random blocks: I = {:?}, kappa {:.4}, residual {:.4e} = {:.4e}",
        c.index_set, c.kappa, c.residual_approx, c.exact_identity_rhs
    );
    println!("  omega {:.4?}", c.omega);
    for r in omega_ratio_diagnostics(&ap, 4, &y)? {
        println!(
            "  omega_{}/omega_{}: {:.4}, secular estimate {:.4}",
            r.i, r.i2, r.exact, r.approx_scaled
        );
    }
    Ok(())
}
