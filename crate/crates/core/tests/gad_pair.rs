use qchain::chain_checks::stein_convergence;
use qchain::channel_div::{
    amortized_gap, channel_dmax, channel_rel_entropy, fixed_input_rel_entropy, naive_witness, InputAnsatz,
};
use qchain::channels::Channel;
use qchain::linalg::HermitianMatrix;

fn pair() -> (Channel, Channel) {
    (Channel::gad(0.3, 0.0).unwrap(), Channel::gad(0.5, 0.9).unwrap())
}

#[test]
fn stein_rates_at_the_optimizer_input() {
    let (e, f) = pair();
    let phi = channel_rel_entropy(&e, &f, &InputAnsatz::diag_1param()).unwrap().argmax_state;
    let r = stein_convergence(&e, &f, &phi, 0.05, 5, true).unwrap();
    let pinned = [0.9227827649, 0.8549426493, 0.8293444509, 0.815540181, 0.8068314979];
    for (&(n, rate), want) in r.rates.iter().zip(pinned) {
        assert!((rate - want).abs() < 1e-6, "n={n}: {rate}");
    }
    assert!(r.rates.windows(2).all(|w| w[1].1 < w[0].1));
    assert!((r.benchmark - 0.917627).abs() < 1e-5);
}

#[test]
fn multistart_does_not_beat_the_covariant_optimum() {
    // for covariant channels the diagonal family contains an optimizer
    let (e, f) = pair();
    let diag = channel_rel_entropy(&e, &f, &InputAnsatz::diag_1param()).unwrap().value.to_f64();
    let general = channel_rel_entropy(&e, &f, &InputAnsatz::multistart(6, 1)).unwrap().value.to_f64();
    assert!(general <= diag + 1e-7, "{general} vs {diag}");
    assert!(general >= diag - 1e-4);
}

#[test]
fn channel_dmax_bounds_relative_entropy() {
    let (e, f) = pair();
    let d = channel_rel_entropy(&e, &f, &InputAnsatz::diag_1param()).unwrap().value.to_f64();
    assert!(channel_dmax(&e, &f).unwrap().to_f64() >= d);
}

#[test]
fn witness_margin_matches_two_copy_bound() {
    let (e, f) = pair();
    let w = naive_witness(&e, &f, &HermitianMatrix::diag(&[0.8, 0.0, 0.0, 0.2])).unwrap();
    let two_copy = fixed_input_rel_entropy(
        &e.tensor_pow(2).unwrap(),
        &f.tensor_pow(2).unwrap(),
        &HermitianMatrix::diag(&[0.8, 0.0, 0.0, 0.2]),
    )
    .unwrap()
    .to_f64();
    assert!((w.output_div - two_copy).abs() < 1e-9);
    assert!(w.margin > 0.09);
    // ρ and σ live on R₁R₂B₁ ⊗ A₂ with the channels acting on A₂
    let gap = amortized_gap(&e, &f, &w.rho, &w.sigma).unwrap().to_f64();
    assert!((gap - (w.output_div - w.input_div)).abs() < 1e-9);
    assert!(gap > w.channel_div);
}
