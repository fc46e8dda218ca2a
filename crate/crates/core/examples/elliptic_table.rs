//! Prints sn, cn, dn over one period and checks the basic identities.

use nlslab::elliptic::{complete_k, jacobi};

fn main() -> nlslab::Result<()> {
    for m in [0.0, 0.25, 0.5, 0.9] {
        let k = complete_k(m)?;
        println!("m = {m}: K = {k:.15}");
        let mut worst = 0.0f64;
        for i in 0..=8 {
            let u = 4.0 * k * i as f64 / 8.0;
            let e = jacobi(u, m)?;
            worst = worst.max((e.sn * e.sn + e.cn * e.cn - 1.0).abs());
            worst = worst.max((e.dn * e.dn + m * e.sn * e.sn - 1.0).abs());
            println!("  u {u:8.5}  sn {:+.10}  cn {:+.10}  dn {:.10}", e.sn, e.cn, e.dn);
        }
        println!("  identity defect {worst:.1e}");
    }
    Ok(())
}
