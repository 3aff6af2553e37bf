//! Central-difference check of the hand-written backward pass.
//!
//! ```bash
//! cargo run --example gradient_check
//! ```

use rand::Rng;
use sasrl::mmrp::sim_rng;
use sasrl::nn::{mse_loss, Activation, Mlp};

fn loss(net: &Mlp, x: &[f64], y: &[f64]) -> f64 {
    mse_loss(&net.forward(x), y).unwrap().0
}

fn main() -> sasrl::Result<()> {
    let mut rng = sim_rng(0);
    let net = Mlp::new(&[4, 16, 16, 2], Activation::Relu, Activation::Tanh, &mut rng)?;
    let x: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
    let y = vec![0.3, -0.2];

    let (_, dl) = mse_loss(&net.forward(&x), &y)?;
    let analytic = net.backward(&x, &dl).parameter_values();

    let theta = net.parameters();
    let mut probe = net.clone();
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let i = rng.random_range(0..theta.len());
        let h = 1e-6;
        let mut p = theta.clone();
        p[i] += h;
        probe.set_parameters(&p);
        let up = loss(&probe, &x, &y);
        p[i] -= 2.0 * h;
        probe.set_parameters(&p);
        let down = loss(&probe, &x, &y);
        let fd = (up - down) / (2.0 * h);
        let scale = fd.abs().max(analytic[i].abs());
        if scale > 1e-9 {
            worst = worst.max((fd - analytic[i]).abs() / scale);
        }
    }
    println!("{} parameters, 200 probes, worst relative error {worst:.2e}", theta.len());
    Ok(())
}
