//! Backpropagation checked against finite differences on a random network
//! trained with the expectile loss, including a target sitting exactly on
//! the loss kink.

use expectrl::approx::{check_mlp_expectile, check_multi_head_expectile, Activation, Mlp, MultiHeadNet};
use expectrl::rng::rng_from;

fn main() -> expectrl::Result<()> {
    let mut rng = rng_from(11, &[]);
    let net = Mlp::new(&[4, 16, 16, 1], Activation::Identity, &mut rng)?;
    let x = [0.2, -0.7, 0.5, 0.1];
    let on_kink = net.predict(&x)?[0];
    for (label, target) in [("off the kink", 1.5), ("on the kink", on_kink)] {
        let report = check_mlp_expectile(&net, &x, &[target], 0.2, 1e-5)?;
        println!(
            "mlp {label}: {} params, max relative error {:.2e}, {} one-sided",
            report.params, report.max_rel_error, report.one_sided
        );
    }
    let heads = MultiHeadNet::new(4, &[16, 16], 1, 3, Activation::Identity, &mut rng)?;
    let report = check_multi_head_expectile(&heads, &x, &[0.3, -0.4, 1.0], &[0.5, 0.3, 0.2], 0.3, 1e-5)?;
    println!(
        "three heads: {} params, max relative error {:.2e}",
        report.params, report.max_rel_error
    );
    Ok(())
}
