//! Regime classification of synthetic error sequences.

use bregman_vi::analysis::fit_rate;

fn main() -> bregman_vi::Result<()> {
    let n = 2_000;
    let cases: [(&str, Vec<f64>); 4] = [
        ("0.3·0.97^t", (0..n).map(|t| 0.3 * 0.97f64.powi(t)).collect()),
        ("2/t", (1..=n).map(|t| 2.0 / t as f64).collect()),
        ("t^(-2/3)·(1 + 1/t)", (1..=n).map(|t| (t as f64).powf(-2.0 / 3.0) * (1.0 + 1.0 / t as f64)).collect()),
        ("[0.5 − 0.1t]_+", (0..n).map(|t| (0.5 - 0.1 * t as f64).max(0.0)).collect()),
    ];
    for (name, s) in cases {
        let fit = fit_rate(&s, 0.2)?;
        println!(
            "{name:<20} {:<28} R² = {:.6}  window {}..{}",
            fit.regime.to_string(),
            fit.r_squared,
            fit.window.0,
            fit.window.1
        );
    }
    Ok(())
}
