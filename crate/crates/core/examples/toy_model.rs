//! The five-object toy model: closed-form eigenpairs and residuals for the
//! three cases on both sides of τ_s = τ_c.

use spectral_ncd::toy::{build_toy, closed_form_oracle, toy_residual, ToyCase};

fn main() -> spectral_ncd::Result<()> {
    for (ts, tc) in [(0.25, 0.2), (0.2, 0.25)] {
        println!("tau_s = {ts}, tau_c = {tc}");
        for case in [ToyCase::Case1, ToyCase::Case2, ToyCase::Case3] {
            let s = build_toy(case, ts, tc, None)?;
            let r = toy_residual(&s)?;
            let closed = closed_form_oracle(&s).map(|p| p.eigenvalues()).unwrap_or_default();
            println!(
                "  {case:?}: residual {:.6} (predicted {:?}), eigenvalues {:.4?}, closed form {:.4?}",
                r.numeric, r.predicted, r.eigenvalues, closed
            );
        }
    }
    Ok(())
}
