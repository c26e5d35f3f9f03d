//! Gaussian closed forms against the brute-force Fock oracle.

use approx::assert_relative_eq;
use qreading::bounds::{chernoff_qs, coherent_fidelity};
use qreading::certify::{coherent_output_state, epr_output_state};
use qreading::channel::{output_cm, Bit, MemoryModel};
use qreading::fock::{chernoff_trace, uhlmann_fidelity, FockOperator, DEFAULT_TRUNCATION_TOL};
use qreading::gaussian::{gp, lambda_p};

#[test]
fn thermal_fractional_powers() {
    for n in [0.1, 0.5, 1.0, 2.0] {
        let nu = 2.0 * n + 1.0;
        let rho = FockOperator::thermal(n, 200).unwrap();
        // ρ^p decays like (N/(N+1))^{pn}; p < 0.5 at N = 2 needs more than 200 levels
        for p in [0.5, 0.8, 1.0] {
            let power = rho.power(p).unwrap();
            let tr = power.trace();
            assert_relative_eq!(tr, gp(nu, p).unwrap(), max_relative = 1e-6);
            // normalized ρ^p is thermal with ν' = Λ_p(ν)
            let n_prime = power.mean_photon_number(0) / tr;
            assert_relative_eq!(2.0 * n_prime + 1.0, lambda_p(nu, p).unwrap(), max_relative = 1e-6);
        }
    }
}

#[test]
fn spec_thermal_example() {
    let rho = FockOperator::thermal(1.0, 200).unwrap();
    let tr = rho.power(0.5).unwrap().trace();
    assert_relative_eq!(tr, 2f64.sqrt() / (2.0 - 2f64.sqrt()), max_relative = 1e-10);
}

#[test]
fn loss_output_moments_match_channel() {
    for (r, n_b, n_s) in [(0.5, 0.1, 1.0), (0.9, 0.5, 0.3), (0.0, 0.2, 0.5), (1.0, 1.0, 0.8)] {
        let mem = MemoryModel::new(r, 1.0, n_b).unwrap();
        let state = epr_output_state(&mem, Bit::Zero, n_s, 45, DEFAULT_TRUNCATION_TOL).unwrap();
        let (_, v) = state.moments();
        let expected = output_cm(&mem, Bit::Zero, n_s).unwrap().dense();
        assert!((v - expected).amax() < 1e-6, "r = {r}, N_B = {n_b}, N_S = {n_s}");
    }
}

#[test]
fn fidelity_and_chernoff_match() {
    let cases = [(0.0, 1.0, 0.0, 1.0), (0.3, 0.95, 0.1, 0.5), (0.5, 0.8, 0.1, 1.0), (0.7, 0.95, 0.5, 0.1)];
    for (r0, r1, n_b, n_s) in cases {
        let mem = MemoryModel::new(r0, r1, n_b).unwrap();
        let [c0, c1] = Bit::BOTH.map(|b| coherent_output_state(&mem, b, n_s, 40, DEFAULT_TRUNCATION_TOL).unwrap());
        assert!((uhlmann_fidelity(&c0, &c1).unwrap() - coherent_fidelity(&mem, n_s).unwrap()).abs() < 1e-4);
        let [e0, e1] = Bit::BOTH.map(|b| epr_output_state(&mem, b, n_s, 40, DEFAULT_TRUNCATION_TOL).unwrap());
        for s in [0.3, 0.5, 0.7] {
            let fock = chernoff_trace(&e0, &e1, s).unwrap();
            assert!((fock - chernoff_qs(&mem, n_s, s).unwrap()).abs() < 1e-4, "{mem:?} s = {s}");
        }
    }
}

#[test]
fn fidelity_is_symmetric() {
    let mem = MemoryModel::new(0.2, 0.9, 0.3).unwrap();
    let [a, b] = Bit::BOTH.map(|bit| epr_output_state(&mem, bit, 0.5, 30, DEFAULT_TRUNCATION_TOL).unwrap());
    assert_relative_eq!(uhlmann_fidelity(&a, &b).unwrap(), uhlmann_fidelity(&b, &a).unwrap(), epsilon = 1e-10);
}

#[test]
fn ideal_memory_chernoff_tends_to_fidelity() {
    // r1 = 1: lim_{s→1} Tr(ρ₀^s |ξ⟩⟨ξ|) = ⟨ξ|ρ₀|ξ⟩
    let mem = MemoryModel::new(0.4, 1.0, 0.2).unwrap();
    let [e0, e1] = Bit::BOTH.map(|b| epr_output_state(&mem, b, 0.5, 30, DEFAULT_TRUNCATION_TOL).unwrap());
    let f = uhlmann_fidelity(&e0, &e1).unwrap();
    assert_relative_eq!(chernoff_trace(&e0, &e1, 1.0 - 1e-6).unwrap(), f, max_relative = 1e-4);
    // and the Gaussian infimum is that fidelity
    let q = qreading::bounds::chernoff_infimum(&mem, 0.5).unwrap().q;
    assert!((q - f).abs() < 1e-4, "{q} vs {f}");
}
