//! Residual along the connection strength t, through the threshold t̄.

use spectral_ncd::toy::{sweep_t, t_bar};

fn main() -> spectral_ncd::Result<()> {
    let (ts, tc) = (0.25, 0.2);
    let tb = t_bar(ts, tc).expect("tau_s < 2 tau_c");
    println!("t_bar = {tb:.6}");
    let grid: Vec<f64> = (0..25).map(|i| ts * i as f64 / 25.0).collect();
    for row in sweep_t(ts, tc, &grid)? {
        let bar = "#".repeat((row.residual_numeric * 40.0).round() as usize);
        println!("t = {:.3}  residual {:.6}  {bar}", row.t, row.residual_numeric);
    }
    Ok(())
}
