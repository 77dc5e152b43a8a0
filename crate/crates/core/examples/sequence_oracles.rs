//! Reference sequences: `s_{t+1} = s_t − a s_t^{1+r}` and the Polyak-type bound.

use bregman_vi::analysis::{oracle_basicnum, oracle_polyak};

fn main() -> bregman_vi::Result<()> {
    for (a, r) in [(0.1, 1.0), (0.1, 0.5), (0.05, 2.0)] {
        let s = oracle_basicnum(a, r, 1.0, 100_000)?;
        let n = &s.normalized;
        println!(
            "a = {a:<4} r = {r:<3}  s_t·(art)^(1/r) at t = 10, 1e3, 1e5: {:.4} {:.4} {:.4}",
            n[9], n[999], n[99_999]
        );
    }

    let rho = vec![0.2; 20];
    let bound = oracle_polyak(1.0, &rho, 1.0)?;
    let mut d = 1.0f64;
    println!("\n t   d_t        bound");
    for (t, b) in bound.iter().enumerate().step_by(4) {
        println!("{:>2}   {d:.6}   {b:.6}", t + 1);
        for p in rho.iter().skip(t).take(4) {
            d -= p * d * d;
        }
    }
    Ok(())
}
