//! Sign, monomial and Dolph filters on matching bands, with grid checks.

use specgap::filter::{dolph_filter, monomial_filter, sign_filter, t_star, verify_filter};

fn main() -> specgap::Result<()> {
    let alpha = 0.1;
    let t = t_star(alpha, 0.1, 0.1)?.t_star.max(0.6);
    println!("t* = {:.6}, using t = {t}", t_star(alpha, 0.1, 0.1)?.t_star);
    for delta in [1e-2, 1e-3, 1e-4] {
        let sign = sign_filter(delta, t, alpha)?;
        let dolph = dolph_filter(delta, t, alpha)?;
        let (rs, rd) = (verify_filter(&sign, 4001), verify_filter(&dolph, 4001));
        println!(
            "delta {delta:.0e}: sign d={:>6} ok={}  dolph d={:>4} ok={} f(1)={:.3}",
            sign.degree(),
            rs.passed(),
            dolph.degree(),
            rd.passed(),
            rd.f_at_1
        );
    }
    let mono = monomial_filter(0.05, 0.01)?;
    let r = verify_filter(&mono, 4001);
    println!(
        "monomial delta 0.05 alpha 0.01: d={} stop max {:.3e} ok={}",
        mono.degree(),
        r.stop_max,
        r.passed()
    );
    Ok(())
}
