//! Wall-bounded channel basis: divergence, norms and the nonlinear term,
//! each computed from the closed-form coefficient formulas and from a
//! physical-space quadrature oracle.

use ns_certify::channel::{
    channel_forcing, channel_norms, divergence_residual, nonlinear_channel, random_channel,
    ChannelDomain,
};
use ns_certify::random::substream;

fn main() -> ns_certify::Result<()> {
    let d = ChannelDomain::new(2.0, 1.0)?;
    let c = random_channel(2, &d, 1.0, 1.0, &mut substream(5, 0));

    let div = divergence_residual(&c, &d);
    println!(
        "divergence: oracle {:.1e}, coefficient formula {:.1e}",
        div.oracle, div.verbatim
    );

    let n = channel_norms(&c, &d);
    println!(
        "|Du|: oracle {:.6} formula {:.6}",
        n.oracle_du, n.verbatim_du
    );
    println!(
        "|Au|: oracle {:.6} formula {:.6}",
        n.oracle_au, n.verbatim_au
    );

    let cmp = nonlinear_channel(&c, &d)?;
    let worst = cmp
        .rows
        .iter()
        .max_by(|a, b| a.difference_abs.total_cmp(&b.difference_abs))
        .expect("nonempty table");
    println!(
        "B(u,u): {} modes compared, largest gap {:.3e} at k = ({}, {}, {})",
        cmp.rows.len(),
        worst.difference_abs,
        worst.k1,
        worst.k2,
        worst.k3
    );

    let f = channel_forcing(7);
    for k2 in 1..=7 {
        println!(
            "forcing sine coefficient k2 = {k2}: {:.6}",
            f.get([0, k2, 0])[0].re
        );
    }
    Ok(())
}
